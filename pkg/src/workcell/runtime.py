"""Holon runtime: behaviour dispatch loops and the confirm handshake.

A holon is one sequential actor: a registered agent whose thread pulls
messages off its mailbox and dispatches each to the single behaviour
whose filter matches. Handlers run strictly one at a time, so holon
state needs no locking. Within a handler, sends must be ordered so that
plain acknowledgements go out before the command that triggers the next
conversation step; that convention is what keeps scenario traces
deterministic.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional

from workcell.errors import (
    AmbiguousFilters,
    HandshakeRefused,
    HandshakeTimeout,
    ReceiveTimeout,
)
from workcell.messaging.acl import AclMessage, AgentId, ContentPayload, Performative
from workcell.messaging.bus import MailboxClosed, MessageBus, MessageFilter, Registration

log = logging.getLogger(__name__)

DEFAULT_HANDSHAKE_TIMEOUT_MS = 2000

Handler = Callable[["Holon", AclMessage], None]


@dataclass(frozen=True)
class BehaviourSpec:
    """One receive-react rule: filter plus deterministic handler."""

    name: str
    filter: MessageFilter
    handler: Handler


@dataclass
class HolonHandle:
    """What spawn() returns; state is opaque to the runtime."""

    aid: AgentId
    behaviours: tuple[BehaviourSpec, ...]
    state: Any = None


class Holon:
    """A spawned agent with a running dispatch loop."""

    def __init__(self, bus: MessageBus, aid: AgentId,
                 behaviours: Iterable[BehaviourSpec], state: Any = None,
                 services: Iterable[str] = (),
                 handshake_timeout_ms: int = DEFAULT_HANDSHAKE_TIMEOUT_MS):
        self.bus = bus
        self.aid = aid
        self.behaviours = tuple(behaviours)
        self.state = state
        self.handshake_timeout_ms = handshake_timeout_ms
        _check_disjoint(self.behaviours)
        self.registration: Registration = bus.register(aid, services)
        self.unmatched: list[AclMessage] = []
        self.unmatched_count = 0
        self._stopped = threading.Event()
        self._thread = threading.Thread(target=self._loop, name=f"holon-{aid}", daemon=True)
        self._thread.start()

    # -- dispatch --

    def _loop(self):
        mailbox = self.registration.mailbox
        while not self._stopped.is_set():
            try:
                msg = mailbox.take(None, timeout_ms=None, mark_busy=True)
            except MailboxClosed:
                return
            try:
                behaviour = self._match(msg)
                if behaviour is None:
                    self.unmatched.append(msg)
                    self.unmatched_count += 1
                    log.warning("%s: no behaviour for %s (conv=%s)",
                                self.aid, msg.performative.value, msg.conversation_id)
                else:
                    behaviour.handler(self, msg)
            except Exception:
                log.exception("%s: handler failed for %s", self.aid, msg.performative.value)
            finally:
                self.bus.busy_exit()

    def _match(self, msg: AclMessage) -> Optional[BehaviourSpec]:
        for behaviour in self.behaviours:
            if behaviour.filter.matches(msg):
                return behaviour
        return None

    def stop(self):
        self._stopped.set()
        if self.bus.is_registered(self.aid):
            self.bus.deregister(self.aid)
        self._thread.join(timeout=2.0)

    # -- messaging helpers --

    def send(self, performative: Performative, receivers: AgentId | Iterable[AgentId],
             conversation_id: str, content: Optional[ContentPayload] = None) -> AclMessage:
        if isinstance(receivers, AgentId):
            receivers = (receivers,)
        msg = AclMessage(performative, self.aid, tuple(receivers), conversation_id,
                         content or ContentPayload.empty())
        return self.bus.send(msg)

    def reply(self, to: AclMessage, performative: Performative,
              content: Optional[ContentPayload] = None) -> AclMessage:
        return self.send(performative, to.sender, to.conversation_id, content)

    def inform_confirm(self, receiver: AgentId, conversation_id: str,
                       content: ContentPayload,
                       timeout_ms: Optional[int] = None) -> ContentPayload:
        """Send an Inform and block until the matching Confirm arrives.

        Call only from this holon's own handlers: the nested receive
        shares the mailbox with the dispatch loop.
        """
        timeout = self.handshake_timeout_ms if timeout_ms is None else timeout_ms
        return inform_confirm(self.bus, self.registration, receiver,
                              conversation_id, content, timeout)


def inform_confirm(bus: MessageBus, sender: Registration, receiver: AgentId,
                   conversation_id: str, content: ContentPayload,
                   timeout_ms: int = DEFAULT_HANDSHAKE_TIMEOUT_MS) -> ContentPayload:
    """One confirmed exchange: Inform out, matching Confirm back.

    Only a Confirm on the same conversation resolves the handshake; a
    Failure reply raises HandshakeRefused, silence HandshakeTimeout.
    """
    bus.send(AclMessage(Performative.INFORM, sender.aid, (receiver,),
                        conversation_id, content))
    want = MessageFilter(
        performative=(Performative.CONFIRM, Performative.FAILURE),
        conversation_id=conversation_id)
    try:
        answer = sender.mailbox.take(want, timeout_ms=timeout_ms)
    except ReceiveTimeout:
        raise HandshakeTimeout(
            f"no confirm from {receiver} on {conversation_id} within {timeout_ms} ms") from None
    if answer.performative is Performative.FAILURE:
        raise HandshakeRefused(answer.content.get("text", "refused"))
    return answer.content


def _check_disjoint(behaviours: tuple[BehaviourSpec, ...]):
    for i, a in enumerate(behaviours):
        for b in behaviours[i + 1:]:
            if a.filter.overlaps(b.filter):
                raise AmbiguousFilters(f"behaviours {a.name!r} and {b.name!r} can both match")


def spawn(bus: MessageBus, aid: AgentId, behaviours: Iterable[BehaviourSpec],
          state: Any = None, services: Iterable[str] = (),
          handshake_timeout_ms: int = DEFAULT_HANDSHAKE_TIMEOUT_MS) -> Holon:
    """Register an agent and start its dispatch loop."""
    return Holon(bus, aid, behaviours, state, services, handshake_timeout_ms)


class RequestClient:
    """Bus participant for request/reply callers (gateway, harness).

    Not an actor: it has no behaviours and consumes only replies to its
    own requests, one request in flight at a time.
    """

    def __init__(self, bus: MessageBus, name: str = "client"):
        self.bus = bus
        self.aid = AgentId(name, bus.platform)
        self.registration = bus.register(self.aid)
        self._lock = threading.Lock()
        self._counter = 0

    def request(self, to: AgentId, content: ContentPayload,
                timeout_ms: int = 2000) -> AclMessage:
        """Send a Request and return the holon's reply message."""
        with self._lock:
            self._counter += 1
            conversation = f"req/{self.aid.name}/{self._counter}"
            self._drain_stale()
            self.bus.send(AclMessage(Performative.REQUEST, self.aid, (to,),
                                     conversation, content))
            want = MessageFilter(conversation_id=conversation)
            return self.registration.mailbox.take(want, timeout_ms=timeout_ms)

    def _drain_stale(self):
        while True:
            try:
                stale = self.registration.mailbox.take(None, timeout_ms=0)
            except ReceiveTimeout:
                return
            log.warning("%s: dropping stale reply on %s", self.aid, stale.conversation_id)

    def close(self):
        if self.bus.is_registered(self.aid):
            self.bus.deregister(self.aid)
