"""Bus-facing layer of the worker holon.

The worker task agent merges order-holon informs and operator requests
into the worker core and turns core effects into messages. Commands
arrive as Requests whose text is a small verb grammar (register,
deregister, availability, gesture, frame, constraint); replies always
acknowledge before any follow-on traffic is sent so traces stay
deterministic. The display agent only mirrors the assigned task text.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from workcell.errors import (
    AlreadyRegistered,
    NotFound,
    WorkcellError,
    WorkerBusy,
    WorkerNotRegistered,
    WorkerUnavailableError,
)
from workcell.gesture import GestureEvent, StreamFolder, meaning, parse_frame
from workcell.messaging.acl import (
    AclMessage,
    AgentId,
    ContentKind,
    ContentPayload,
    Performative,
)
from workcell.messaging.bus import MessageBus, MessageFilter
from workcell.runtime import BehaviourSpec, Holon, spawn
from workcell.worker import (
    BroadcastStatus,
    FailTask,
    SendAssist,
    SendCompletion,
    SendConstraint,
    WorkerCore,
    WorkerProfile,
)

log = logging.getLogger(__name__)

WORKER_TASK = "worker"
WORKER_DISPLAY = "worker_display"

_ERROR_TOKENS = {
    AlreadyRegistered: "already_registered",
    WorkerNotRegistered: "not_registered",
    WorkerBusy: "worker_busy",
    WorkerUnavailableError: "worker_unavailable",
    NotFound: "not_found",
}


def _error_token(exc: Exception) -> str:
    for cls, token in _ERROR_TOKENS.items():
        if isinstance(exc, cls):
            return token
    return "bad_command"


@dataclass
class DisplayState:
    text: str = ""


@dataclass
class WorkerAgents:
    task: Holon
    display: Holon
    core: WorkerCore
    display_state: DisplayState = field(default_factory=DisplayState)

    def stop(self):
        self.task.stop()
        self.display.stop()


def spawn_worker_agents(bus: MessageBus, core: WorkerCore, order_aid: AgentId,
                        product_aid: AgentId, platform: Optional[str] = None) -> WorkerAgents:
    platform = platform or bus.platform
    display_state = DisplayState()
    folder = StreamFolder()

    def emit_effects(holon: Holon, effects):
        for effect in effects:
            if isinstance(effect, BroadcastStatus):
                holon.send(Performative.INFORM, order_aid, "worker/status",
                           ContentPayload.status(effect.text))
            elif isinstance(effect, SendCompletion):
                holon.send(Performative.INFORM, order_aid, effect.conversation_id,
                           ContentPayload.task_details(
                               effect.task_name, kind="worker",
                               step_index=effect.step_index,
                               order_id=effect.order_id, text="done"))
            elif isinstance(effect, SendAssist):
                holon.send(Performative.INFORM, order_aid,
                           core.next_assist_conversation(),
                           ContentPayload.task_name(
                               effect.robot_task,
                               text=f"tool {effect.tool} x{effect.quantity}"))
            elif isinstance(effect, SendConstraint):
                holon.send(Performative.INFORM, product_aid,
                           core.next_constraint_conversation(),
                           ContentPayload.constraint(effect.report.text))
            elif isinstance(effect, FailTask):
                holon.send(Performative.FAILURE, order_aid, effect.conversation_id,
                           ContentPayload.status(effect.reason))

    def on_order_inform(holon: Holon, msg: AclMessage):
        if msg.content.kind is ContentKind.TASK_DETAILS:
            try:
                core.on_assignment(
                    order_id=msg.content.get("order_id"),
                    step_index=msg.content.step_index,
                    task_name=msg.content.get("task_name"),
                    description=msg.content.get("description"),
                    conversation_id=msg.conversation_id)
            except WorkcellError as exc:
                holon.reply(msg, Performative.FAILURE,
                            ContentPayload.status(_error_token(exc)))
        elif msg.content.get("text") == "cancel":
            dropped = core.abandon_task()
            log.info("worker task abandoned: %s", dropped)
        else:
            log.warning("unexpected order inform: %s", msg.content.get("text"))

    def on_request(holon: Holon, msg: AclMessage):
        text = msg.content.get("text")
        verb, _, rest = text.partition(" ")
        try:
            outcome, effects = _run_command(verb, rest)
        except WorkcellError as exc:
            holon.reply(msg, Performative.FAILURE, ContentPayload.status(_error_token(exc)))
            return
        except ValueError as exc:
            holon.reply(msg, Performative.FAILURE,
                        ContentPayload.status(f"bad_command {exc}"))
            return
        holon.reply(msg, Performative.INFORM, ContentPayload.status(outcome))
        emit_effects(holon, effects)

    def _run_command(verb: str, rest: str):
        if verb == "register":
            parts = rest.split()
            if len(parts) < 2:
                raise ValueError("register needs worker_id and location")
            caps = frozenset(parts[2].split(",")) if len(parts) > 2 else frozenset()
            effects = core.on_register(WorkerProfile(parts[0], parts[1], caps))
            return "ok", effects
        if verb == "deregister":
            return "ok", core.on_deregister()
        if verb == "availability":
            if rest not in ("on", "off"):
                raise ValueError("availability takes on|off")
            return "ok", core.set_availability(rest == "on")
        if verb == "gesture":
            parts = rest.split()
            if not parts:
                raise ValueError("gesture needs a name")
            gesture = _parse_gesture(parts[0])
            tool = parts[1] if len(parts) > 1 else None
            outcome, effects = core.on_worker_signal(meaning(gesture), tool)
            return outcome, effects
        if verb == "frame":
            event = folder.feed(parse_frame(rest))
            if event is None:
                return "none", []
            outcome, effects = core.on_worker_signal(meaning(event))
            return f"{event.value} {outcome}", effects
        if verb == "constraint":
            if not rest:
                raise ValueError("constraint needs text")
            return "ok", core.on_constraint(rest)
        raise ValueError(f"unknown command {verb!r}")

    def on_display(holon: Holon, msg: AclMessage):
        name = msg.content.get("task_name")
        if name:
            description = msg.content.get("description")
            display_state.text = f"{name}: {description}" if description else name
        else:
            display_state.text = msg.content.get("text", "")

    task = spawn(bus, AgentId(WORKER_TASK, platform), [
        BehaviourSpec("order-traffic",
                      MessageFilter(performative=Performative.INFORM,
                                    conversation_prefix="order/"),
                      on_order_inform),
        BehaviourSpec("commands",
                      MessageFilter(performative=Performative.REQUEST),
                      on_request),
    ], state=core, services=("task_assignment",))
    display = spawn(bus, AgentId(WORKER_DISPLAY, platform), [
        BehaviourSpec("display", MessageFilter(performative=Performative.INFORM), on_display),
    ], state=display_state, services=("worker_display",))
    return WorkerAgents(task, display, core, display_state)


def _parse_gesture(token: str) -> GestureEvent:
    for gesture in GestureEvent:
        if gesture.value == token:
            return gesture
    raise ValueError(f"unknown gesture {token!r}")
