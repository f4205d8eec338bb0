"""In-process message bus: registry, mailboxes, sniffer tap.

One bus hosts the agents of one platform. Delivery to agents whose id
names another platform is handed to a pluggable remote router (see
messaging.transport). Every successful send appends exactly one record
to the trace collector, which is the single serialization point that
defines the global message order.

The bus also keeps two counters, queued messages and busy handlers, so a
scenario harness can wait until the whole cell is quiescent before it
injects the next scripted action.
"""

from __future__ import annotations

import threading
import time
from collections import OrderedDict, deque
from dataclasses import dataclass, field
from queue import Empty, Queue
from typing import Callable, Iterable, Optional

from workcell.clock import Clock
from workcell.errors import (
    DuplicateAid,
    NotRegistered,
    ReceiveTimeout,
    SenderNotRegistered,
    UnknownReceiver,
    WorkcellError,
)
from workcell.messaging.acl import (
    AclMessage,
    AgentId,
    ContentPayload,
    Performative,
)

SYSTEM_AGENT_NAME = "ams"


class MailboxClosed(WorkcellError):
    """The owning agent deregistered while a receive was pending."""


@dataclass(frozen=True)
class MessageFilter:
    """Mailbox filter; unset fields match anything.

    performative accepts a single value or a tuple of alternatives.
    conversation_id matches exactly, conversation_prefix by startswith.
    """

    performative: Optional[Performative | tuple[Performative, ...]] = None
    conversation_id: Optional[str] = None
    conversation_prefix: Optional[str] = None

    def _performatives(self) -> Optional[tuple[Performative, ...]]:
        if self.performative is None:
            return None
        if isinstance(self.performative, Performative):
            return (self.performative,)
        return tuple(self.performative)

    def matches(self, msg: AclMessage) -> bool:
        allowed = self._performatives()
        if allowed is not None and msg.performative not in allowed:
            return False
        if self.conversation_id is not None and msg.conversation_id != self.conversation_id:
            return False
        if self.conversation_prefix is not None and not msg.conversation_id.startswith(self.conversation_prefix):
            return False
        return True

    def overlaps(self, other: "MessageFilter") -> bool:
        """Conservative static overlap check used at holon startup."""
        mine, theirs = self._performatives(), other._performatives()
        if mine is not None and theirs is not None and not set(mine) & set(theirs):
            return False
        return _conversations_overlap(self, other)


def _conversations_overlap(a: MessageFilter, b: MessageFilter) -> bool:
    if a.conversation_id is not None and b.conversation_id is not None:
        return a.conversation_id == b.conversation_id
    if a.conversation_id is not None and b.conversation_prefix is not None:
        return a.conversation_id.startswith(b.conversation_prefix)
    if b.conversation_id is not None and a.conversation_prefix is not None:
        return b.conversation_id.startswith(a.conversation_prefix)
    if a.conversation_prefix is not None and b.conversation_prefix is not None:
        return (a.conversation_prefix.startswith(b.conversation_prefix)
                or b.conversation_prefix.startswith(a.conversation_prefix))
    return True


@dataclass(frozen=True)
class SnifferRecord:
    """One observed message with its place in the global order."""

    message: AclMessage
    delivered_at: int
    global_seq: int


class Tap:
    """Subscription to the record stream; records arrive exactly once."""

    def __init__(self):
        self._queue: Queue[SnifferRecord] = Queue()

    def _push(self, record: SnifferRecord):
        self._queue.put(record)

    def get(self, timeout: float = 2.0) -> SnifferRecord:
        try:
            return self._queue.get(timeout=timeout)
        except Empty:
            raise ReceiveTimeout("no sniffer record within window") from None

    def drain(self) -> list[SnifferRecord]:
        out = []
        while True:
            try:
                out.append(self._queue.get_nowait())
            except Empty:
                return out


class TraceCollector:
    """Assigns the bus-wide global_seq; shared across platforms in tests."""

    def __init__(self):
        self._lock = threading.Lock()
        self._records: list[SnifferRecord] = []
        self._taps: list[Tap] = []

    def record(self, msg: AclMessage, delivered_at: int) -> SnifferRecord:
        with self._lock:
            rec = SnifferRecord(msg, delivered_at, len(self._records) + 1)
            self._records.append(rec)
            taps = list(self._taps)
        for tap in taps:
            tap._push(rec)
        return rec

    def subscribe(self) -> Tap:
        with self._lock:
            tap = Tap()
            self._taps.append(tap)
            return tap

    def records(self) -> list[SnifferRecord]:
        with self._lock:
            return list(self._records)

    def count(self) -> int:
        with self._lock:
            return len(self._records)


class Mailbox:
    """FIFO message queue with filtered blocking receive."""

    def __init__(self, bus: "MessageBus", owner: AgentId):
        self._bus = bus
        self.owner = owner
        self._messages: deque[AclMessage] = deque()
        self._cond = threading.Condition(bus._lock)
        self.closed = False

    def _enqueue(self, msg: AclMessage):
        # caller holds the bus lock
        self._messages.append(msg)
        self._bus._queued += 1
        self._cond.notify_all()

    def _drain(self) -> list[AclMessage]:
        # caller holds the bus lock
        pending = list(self._messages)
        self._bus._queued -= len(pending)
        self._messages.clear()
        return pending

    def take(self, filter: Optional[MessageFilter] = None,
             timeout_ms: Optional[int] = 2000, *, mark_busy: bool = False) -> AclMessage:
        """Remove and return the oldest matching message.

        Non-matching messages stay queued in order. Raises ReceiveTimeout
        when nothing matches within the window, MailboxClosed after
        deregistration.
        """
        deadline = None if timeout_ms is None else time.monotonic() + timeout_ms / 1000.0
        with self._bus._lock:
            while True:
                for i, msg in enumerate(self._messages):
                    if filter is None or filter.matches(msg):
                        del self._messages[i]
                        self._bus._queued -= 1
                        if mark_busy:
                            self._bus._busy += 1
                        return msg
                if self.closed:
                    raise MailboxClosed(str(self.owner))
                if deadline is None:
                    self._cond.wait(0.5)
                    continue
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise ReceiveTimeout(f"no message for {self.owner} within {timeout_ms} ms")
                self._cond.wait(remaining)

    def peek_count(self) -> int:
        with self._bus._lock:
            return len(self._messages)


@dataclass
class Registration:
    """Handle returned by register(); owns the agent's mailbox."""

    aid: AgentId
    mailbox: Mailbox
    bus: "MessageBus"
    services: frozenset[str] = field(default_factory=frozenset)

    def receive(self, filter: Optional[MessageFilter] = None,
                timeout_ms: Optional[int] = 2000) -> AclMessage:
        return self.mailbox.take(filter, timeout_ms)


RemoteRouter = Callable[[str, AclMessage], None]


class MessageBus:
    """Registry plus reliable in-process delivery for one platform.

    A bus normally hosts one platform name; the in-process workcell mode
    passes several so agents keep their two-platform addresses while
    sharing one delivery fabric.
    """

    def __init__(self, platform: str | Iterable[str], clock: Clock,
                 trace: Optional[TraceCollector] = None):
        names = (platform,) if isinstance(platform, str) else tuple(platform)
        self.platform = names[0]
        self.platforms = frozenset(names)
        self.clock = clock
        self.trace = trace or TraceCollector()
        self._lock = threading.RLock()
        self._agents: "OrderedDict[AgentId, Registration]" = OrderedDict()
        self._seq: dict[AgentId, int] = {}
        self._queued = 0
        self._busy = 0
        self._remote_router: Optional[RemoteRouter] = None

    # -- registry --

    def register(self, aid: AgentId, services: Iterable[str] = ()) -> Registration:
        with self._lock:
            if aid in self._agents:
                raise DuplicateAid(str(aid))
            reg = Registration(aid, Mailbox(self, aid), self, frozenset(services))
            self._agents[aid] = reg
            return reg

    def deregister(self, aid: AgentId):
        """Close the agent's mailbox; pending messages bounce back as Failure."""
        with self._lock:
            reg = self._agents.pop(aid, None)
            if reg is None:
                raise NotRegistered(str(aid))
            reg.mailbox.closed = True
            pending = reg.mailbox._drain()
            reg.mailbox._cond.notify_all()
        system = AgentId(SYSTEM_AGENT_NAME, self.platform)
        for msg in pending:
            bounce = AclMessage(
                Performative.FAILURE, system, (msg.sender,), msg.conversation_id,
                ContentPayload.status(f"unknown_receiver {aid}"))
            try:
                self.send(bounce, _system=True)
            except WorkcellError:
                pass

    def is_registered(self, aid: AgentId) -> bool:
        with self._lock:
            return aid in self._agents

    def search(self, service: str) -> list[AgentId]:
        """Providers of a service, in registration order."""
        with self._lock:
            return [aid for aid, reg in self._agents.items() if service in reg.services]

    # -- delivery --

    def set_remote_router(self, router: Optional[RemoteRouter]):
        self._remote_router = router

    def send(self, msg: AclMessage, *, _system: bool = False) -> AclMessage:
        """Stamp and deliver a message to every receiver's mailbox.

        The registration check over local receivers is all-or-nothing;
        remote receivers are validated by their own platform when the
        frame arrives.
        """
        with self._lock:
            if not _system and msg.sender not in self._agents:
                raise SenderNotRegistered(str(msg.sender))
            seq = self._seq.get(msg.sender, 0) + 1
            self._seq[msg.sender] = seq
            stamped = msg.stamped(seq, self.clock.now_ms())
            local = [r for r in stamped.receivers if r.platform in self.platforms]
            remote = [r for r in stamped.receivers if r.platform not in self.platforms]
            for r in local:
                if r not in self._agents:
                    raise UnknownReceiver(str(r))
        if remote:
            if self._remote_router is None:
                raise UnknownReceiver(f"no route to platform {remote[0].platform}")
            for platform in dict.fromkeys(r.platform for r in remote):
                self._remote_router(platform, stamped)
        with self._lock:
            for r in local:
                reg = self._agents.get(r)
                if reg is None:
                    raise UnknownReceiver(str(r))
                reg.mailbox._enqueue(stamped)
        self.trace.record(stamped, self.clock.now_ms())
        return stamped

    def deliver_inbound(self, msg: AclMessage):
        """Enqueue a message that arrived from another platform."""
        with self._lock:
            local = [r for r in msg.receivers if r.platform in self.platforms]
            for r in local:
                if r not in self._agents:
                    raise UnknownReceiver(str(r))
            for r in local:
                self._agents[r].mailbox._enqueue(msg)

    def tap(self) -> Tap:
        return self.trace.subscribe()

    # -- quiescence accounting --

    def busy_enter(self):
        with self._lock:
            self._busy += 1

    def busy_exit(self):
        with self._lock:
            self._busy -= 1

    def load(self) -> tuple[int, int]:
        with self._lock:
            return self._queued, self._busy

    def is_quiescent(self) -> bool:
        queued, busy = self.load()
        return queued == 0 and busy == 0


def wait_quiescent(buses: Iterable[MessageBus], trace: TraceCollector,
                   timeout_s: float = 10.0) -> bool:
    """Block until no bus has queued messages or running handlers.

    Requires two consecutive calm observations with an unchanged global
    message count, so a handler that is just about to enqueue cannot slip
    through between per-bus checks.
    """
    buses = list(buses)
    deadline = time.monotonic() + timeout_s
    calm_count = -1
    while time.monotonic() < deadline:
        if all(b.is_quiescent() for b in buses):
            count = trace.count()
            if count == calm_count:
                return True
            calm_count = count
        else:
            calm_count = -1
        time.sleep(0.001)
    return False
