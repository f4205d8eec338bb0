"""Order holon: step routing, task timing, and the teaching master.

The order agent receives step dispatches from the product agent and
routes each to its executor: robot steps become a display update plus an
execute command on the robot platform, worker steps a display update
plus an assignment. The display message always goes out first in the
same handler turn. Completions come back as informs; the order agent
stamps done_at, logs the task duration (done minus assigned), and relays
a Propose to the product agent.

The teaching master walks a four-phase confirmed handshake with the
teaching slave (init, start, stop, save); the recorded profile becomes
available only after the fourth confirm. While a session is active the
order agent defers incoming step dispatches and flushes them when the
master announces the session is over.
"""

from __future__ import annotations

import logging
import os
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from workcell.clock import Clock
from workcell.errors import (
    HandshakeError,
    HandshakeRefused,
    HandshakeTimeout,
    TeachingActive,
    UnknownReceiver,
    WorkcellError,
)
from workcell.messaging.acl import (
    AclMessage,
    AgentId,
    ContentKind,
    ContentPayload,
    Performative,
)
from workcell.messaging.bus import MessageBus, MessageFilter
from workcell.robot.body import ArmId
from workcell.runtime import BehaviourSpec, Holon, spawn

log = logging.getLogger(__name__)

ORDER_AGENT = "order"
TASK_MASTER = "task_master"


@dataclass(frozen=True)
class AgentDirectory:
    """Well-known agent addresses the order holon routes to."""

    product: AgentId
    worker: AgentId
    worker_display: AgentId
    robot_task: AgentId
    robot_display: AgentId
    task_slave: AgentId


@dataclass
class TaskDescriptor:
    order_id: str
    step_index: int
    kind: str
    task_name: str
    arm: Optional[str]
    description: str
    conversation_id: str
    assigned_at: int
    done_at: Optional[int] = None

    @property
    def done(self) -> bool:
        return self.done_at is not None

    def view(self) -> dict:
        return {
            "order_id": self.order_id,
            "step_index": self.step_index,
            "kind": self.kind,
            "task_name": self.task_name,
            "arm": self.arm,
            "description": self.description,
            "assigned_at": self.assigned_at,
            "done_at": self.done_at,
        }


class TeachPhase(Enum):
    INIT = "Init"
    RECORDING = "Recording"
    STOPPED = "Stopped"
    SAVED = "Saved"


# handshake step name -> phase reached once the slave confirms
_PHASE_SEQUENCE = (
    ("init", TeachPhase.INIT),
    ("start", TeachPhase.RECORDING),
    ("stop", TeachPhase.STOPPED),
    ("save", TeachPhase.SAVED),
)


@dataclass
class TeachingSession:
    session_id: str
    task_name: str
    arm: ArmId
    phase: Optional[TeachPhase] = None

    @property
    def conversation_id(self) -> str:
        return f"teach/{self.session_id}"

    def next_step(self) -> Optional[tuple[str, TeachPhase]]:
        reached = [p for _, p in _PHASE_SEQUENCE]
        if self.phase is None:
            return _PHASE_SEQUENCE[0]
        index = reached.index(self.phase)
        if index + 1 >= len(_PHASE_SEQUENCE):
            return None
        return _PHASE_SEQUENCE[index + 1]


class TimingLog:
    """Append-only task timing record."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, task: TaskDescriptor, duration_ms: int):
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(f"{task.order_id} {task.step_index} {task.kind} {task.task_name} "
                     f"{task.assigned_at} {task.done_at} {duration_ms}\n")
            fh.flush()
            os.fsync(fh.fileno())

    def lines(self) -> list[str]:
        if not self.path.exists():
            return []
        return self.path.read_text(encoding="utf-8").splitlines()


@dataclass
class TeachingGate:
    """Shared flag: order dispatches are deferred while teaching."""

    active: bool = False


class OrderState:
    """Order agent bookkeeping: executor slots and the current/next view."""

    def __init__(self, clock: Clock, timing: TimingLog):
        self.clock = clock
        self.timing = timing
        self.executors: dict[str, TaskDescriptor] = {}
        self.current: Optional[TaskDescriptor] = None
        self.next_text: str = ""
        self.worker_status: str = ""
        self.deferred: list[AclMessage] = []
        self.completed_steps: list[dict] = []

    def executor_key(self, kind: str, arm: Optional[str]) -> str:
        return arm if kind == "robot" else "worker"

    def active_for(self, key: str) -> Optional[TaskDescriptor]:
        task = self.executors.get(key)
        if task is not None and not task.done:
            return task
        return None

    def find_by_conversation(self, conversation_id: str) -> Optional[TaskDescriptor]:
        for task in self.executors.values():
            if task.conversation_id == conversation_id and not task.done:
                return task
        return None

    def current_next_view(self) -> dict:
        current = self.current.view() if self.current is not None else None
        return {"current": current, "next": self.next_text or None}

    def snapshot(self) -> dict:
        view = self.current_next_view()
        view["worker_status"] = self.worker_status
        view["completed_steps"] = list(self.completed_steps)
        return view


@dataclass
class OrderHolons:
    order: Holon
    master: Holon
    state: OrderState
    gate: TeachingGate

    def stop(self):
        self.order.stop()
        self.master.stop()


def spawn_order_agents(bus: MessageBus, directory: AgentDirectory, clock: Clock,
                       timing_log: TimingLog, gate: Optional[TeachingGate] = None,
                       handshake_timeout_ms: int = 2000,
                       platform: Optional[str] = None) -> OrderHolons:
    platform = platform or bus.platform
    state = OrderState(clock, timing_log)
    gate = gate or TeachingGate()

    # -- order agent --

    def dispatch(holon: Holon, msg: AclMessage):
        if gate.active:
            state.deferred.append(msg)
            log.info("deferring dispatch while teaching: %s", msg.conversation_id)
            return
        _dispatch_now(holon, msg)

    def _dispatch_now(holon: Holon, msg: AclMessage):
        content = msg.content
        kind = content.get("kind")
        arm = content.get("arm") or None
        key = state.executor_key(kind, arm)
        if state.active_for(key) is not None:
            holon.send(Performative.FAILURE, directory.product, msg.conversation_id,
                       ContentPayload.status(f"executor_busy {key}"))
            return
        task = TaskDescriptor(
            order_id=content.get("order_id"), step_index=content.step_index,
            kind=kind, task_name=content.get("task_name"), arm=arm,
            description=content.get("description"),
            conversation_id=msg.conversation_id, assigned_at=clock.now_ms())
        state.executors[key] = task
        state.current = task
        next_text = content.get("text").removeprefix("next ").strip()
        state.next_text = "" if next_text == "none" else next_text
        display_payload = ContentPayload.task_name(
            task.task_name, description=task.description)
        try:
            if kind == "robot":
                holon.send(Performative.INFORM, directory.robot_display,
                           msg.conversation_id, display_payload)
                holon.send(Performative.INFORM, directory.robot_task,
                           msg.conversation_id, content)
            else:
                holon.send(Performative.INFORM, directory.worker_display,
                           msg.conversation_id, display_payload)
                holon.send(Performative.INFORM, directory.worker,
                           msg.conversation_id, content)
        except UnknownReceiver as exc:
            state.executors.pop(key, None)
            state.current = None
            state.next_text = ""
            holon.send(Performative.FAILURE, directory.product, msg.conversation_id,
                       ContentPayload.status(f"unreachable {exc}"))

    def on_completion(holon: Holon, msg: AclMessage):
        task = state.find_by_conversation(msg.conversation_id)
        if task is None:
            log.warning("completion with no active task: %s", msg.conversation_id)
            return
        task.done_at = clock.now_ms()
        duration = task.done_at - task.assigned_at
        state.timing.append(task, duration)
        state.completed_steps.append({**task.view(), "duration_ms": duration})
        holon.send(Performative.PROPOSE, directory.product, msg.conversation_id,
                   ContentPayload.task_details(
                       task.task_name, kind=task.kind, step_index=task.step_index,
                       order_id=task.order_id, arm=task.arm or "", text="done"))

    def on_order_complete(holon: Holon, msg: AclMessage):
        state.current = None
        state.next_text = ""
        log.info("order complete: %s", msg.content.get("order_id"))

    def on_assist(holon: Holon, msg: AclMessage):
        if msg.sender == directory.worker:
            task_name = msg.content.get("task_name")
            display = ContentPayload.task_name(task_name,
                                               description=msg.content.get("text"))
            try:
                holon.send(Performative.INFORM, directory.robot_display,
                           msg.conversation_id, display)
                holon.send(Performative.INFORM, directory.robot_task,
                           msg.conversation_id,
                           ContentPayload.task_name(task_name, text="assist"))
            except UnknownReceiver as exc:
                log.warning("assist dispatch failed: %s", exc)
        else:
            log.info("assist done: %s", msg.content.get("text"))

    def on_worker_status(holon: Holon, msg: AclMessage):
        state.worker_status = msg.content.get("text")

    def on_failure(holon: Holon, msg: AclMessage):
        if msg.sender == directory.product:
            # product aborted the order: tear the step down, then ack
            task = state.find_by_conversation(msg.conversation_id)
            if task is not None and task.kind == "worker":
                holon.send(Performative.INFORM, directory.worker, msg.conversation_id,
                           ContentPayload.status("cancel"))
            for key, active in list(state.executors.items()):
                if active.conversation_id == msg.conversation_id:
                    del state.executors[key]
            state.current = None
            state.next_text = ""
            holon.reply(msg, Performative.INFORM, ContentPayload.status("abort_done"))
            return
        task = state.find_by_conversation(msg.conversation_id)
        if task is not None:
            for key, active in list(state.executors.items()):
                if active is task:
                    del state.executors[key]
            state.current = None
            state.next_text = ""
        holon.send(Performative.FAILURE, directory.product, msg.conversation_id,
                   ContentPayload.status(msg.content.get("text", "executor_failure")))

    def on_teach_done(holon: Holon, msg: AclMessage):
        deferred, state.deferred = state.deferred, []
        for pending in deferred:
            _dispatch_now(holon, pending)

    order = spawn(bus, AgentId(ORDER_AGENT, platform), [
        BehaviourSpec("agree", MessageFilter(performative=Performative.AGREE), dispatch),
        BehaviourSpec("accept", MessageFilter(performative=Performative.ACCEPT_PROPOSAL), dispatch),
        BehaviourSpec("reject", MessageFilter(performative=Performative.REJECT_PROPOSAL),
                      on_order_complete),
        BehaviourSpec("completions",
                      MessageFilter(performative=Performative.INFORM,
                                    conversation_prefix="order/"),
                      on_completion),
        BehaviourSpec("assists",
                      MessageFilter(performative=Performative.INFORM,
                                    conversation_prefix="assist/"),
                      on_assist),
        BehaviourSpec("worker-status",
                      MessageFilter(performative=Performative.INFORM,
                                    conversation_prefix="worker/"),
                      on_worker_status),
        BehaviourSpec("teach-done",
                      MessageFilter(performative=Performative.INFORM,
                                    conversation_prefix="teachgate/"),
                      on_teach_done),
        BehaviourSpec("failures", MessageFilter(performative=Performative.FAILURE), on_failure),
    ], state=state, services=("task_dispatch",))

    # -- teaching master --

    master_state = MasterState()

    def on_master_request(holon: Holon, msg: AclMessage):
        text = msg.content.get("text")
        verb, _, rest = text.partition(" ")
        try:
            reply = _run_teach_command(holon, verb, rest)
        except (WorkcellError, ValueError) as exc:
            holon.reply(msg, Performative.FAILURE,
                        ContentPayload.status(f"{_teach_error_token(exc)} {exc}"))
            return
        holon.reply(msg, Performative.INFORM, reply)

    def _run_teach_command(holon: Holon, verb: str, rest: str) -> ContentPayload:
        if verb == "teach":
            task, arm = _parse_teach_args(rest)
            session = _open_session(task, arm)
            for step_name, phase in _PHASE_SEQUENCE:
                _advance(holon, session, step_name, phase)
            _close_session(holon, session)
            return ContentPayload.status(
                f"saved {session.task_name}", task_name=session.task_name)
        if verb == "teach_init":
            task, arm = _parse_teach_args(rest)
            session = _open_session(task, arm)
            _advance(holon, session, "init", TeachPhase.INIT)
            return ContentPayload.status("Init", task_name=task)
        if verb in ("teach_start", "teach_stop", "teach_save"):
            session = master_state.session
            if session is None:
                raise ValueError("no teaching session")
            expected = {"teach_start": ("start", TeachPhase.RECORDING),
                        "teach_stop": ("stop", TeachPhase.STOPPED),
                        "teach_save": ("save", TeachPhase.SAVED)}[verb]
            if session.next_step() != expected:
                raise ValueError(f"phase is {session.phase}, cannot {verb}")
            _advance(holon, session, *expected)
            if expected[1] is TeachPhase.SAVED:
                _close_session(holon, session)
            return ContentPayload.status(expected[1].value, task_name=session.task_name)
        if verb == "teach_abort":
            session = master_state.session
            if session is not None:
                _abort(holon, session)
            return ContentPayload.status("aborted")
        if verb == "teach_status":
            session = master_state.session
            phase = session.phase.value if session and session.phase else "none"
            task = session.task_name if session else ""
            return ContentPayload.status(phase, task_name=task or "-")
        raise ValueError(f"unknown command {verb!r}")

    def _open_session(task: str, arm: ArmId) -> TeachingSession:
        if master_state.session is not None:
            raise TeachingActive(master_state.session.session_id)
        master_state.counter += 1
        session = TeachingSession(f"t{master_state.counter}", task, arm)
        master_state.session = session
        gate.active = True
        return session

    def _advance(holon: Holon, session: TeachingSession, step_name: str,
                 phase: TeachPhase):
        content = ContentPayload.task_name(session.task_name,
                                           arm=session.arm.value, text=step_name)
        try:
            holon.inform_confirm(directory.task_slave, session.conversation_id, content,
                                 timeout_ms=handshake_timeout_ms)
        except (HandshakeError, UnknownReceiver):
            _abort(holon, session)
            raise
        session.phase = phase

    def _abort(holon: Holon, session: TeachingSession):
        try:
            holon.send(Performative.INFORM, directory.task_slave, session.conversation_id,
                       ContentPayload.task_name(session.task_name,
                                                arm=session.arm.value, text="abort"))
        except UnknownReceiver:
            pass
        _close_session(holon, session)

    def _close_session(holon: Holon, session: TeachingSession):
        master_state.session = None
        master_state.last = session
        gate.active = False
        # separate conversation: the teaching conversation itself stays
        # exactly four Inform/Confirm pairs
        try:
            holon.send(Performative.INFORM, AgentId(ORDER_AGENT, platform),
                       f"teachgate/{session.session_id}",
                       ContentPayload.status("teach_done"))
        except UnknownReceiver:
            pass

    master = spawn(bus, AgentId(TASK_MASTER, platform), [
        BehaviourSpec("commands", MessageFilter(performative=Performative.REQUEST),
                      on_master_request),
    ], state=master_state, services=("robot_teaching_master",),
        handshake_timeout_ms=handshake_timeout_ms)

    return OrderHolons(order, master, state, gate)


@dataclass
class MasterState:
    session: Optional[TeachingSession] = None
    last: Optional[TeachingSession] = None
    counter: int = 0


def _parse_teach_args(rest: str) -> tuple[str, ArmId]:
    parts = rest.split()
    if len(parts) != 2:
        raise ValueError("teach needs <task> <arm>")
    return parts[0], ArmId.parse(parts[1])


def _teach_error_token(exc: Exception) -> str:
    if isinstance(exc, HandshakeTimeout):
        return "timeout"
    if isinstance(exc, HandshakeRefused):
        return "refused"
    if isinstance(exc, TeachingActive):
        return "teaching_active"
    if isinstance(exc, UnknownReceiver):
        return "unreachable"
    return "bad_command"
