"""Robot-platform agents: task execution, display, and teaching slave.

Each agent runs a cyclic receive behaviour and relays the message content
to its bridge endpoint over TCP, the same path an external driver would
use. The teaching slave walks the four-phase recording lifecycle against
the body and answers every phase Inform with a Confirm, or a Failure
when the body refuses.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from workcell.errors import WorkcellError
from workcell.messaging.acl import AclMessage, AgentId, ContentPayload, Performative
from workcell.messaging.bus import MessageBus, MessageFilter
from workcell.robot.body import ArmId, RecordingSession, RobotBody
from workcell.robot.bridge import RobotBridge, bridge_request
from workcell.runtime import BehaviourSpec, Holon, spawn

log = logging.getLogger(__name__)

ROBOT_TASK = "robot_task"
ROBOT_DISPLAY = "robot_display"
TASK_SLAVE = "task_slave"


@dataclass
class SlaveState:
    session: Optional[RecordingSession] = None
    muted: bool = False


@dataclass
class RobotAgents:
    task: Holon
    display: Holon
    slave: Holon
    slave_state: SlaveState = field(default_factory=SlaveState)

    def stop(self):
        for holon in (self.task, self.display, self.slave):
            holon.stop()


def spawn_robot_agents(bus: MessageBus, body: RobotBody, bridge: RobotBridge,
                       platform: Optional[str] = None) -> RobotAgents:
    platform = platform or bus.platform
    slave_state = SlaveState()

    def on_execute(holon: Holon, msg: AclMessage):
        task = msg.content.get("task_name")
        reply = bridge_request(bridge.execute.port, task)
        if reply == "OK":
            done = ContentPayload.task_details(
                task, kind=msg.content.get("kind", "robot"),
                step_index=int(msg.content.get("step_index", "0")),
                order_id=msg.content.get("order_id"),
                arm=msg.content.get("arm"), text="done")
            holon.reply(msg, Performative.INFORM, done)
        else:
            reason = reply.removeprefix("ERR ").strip()
            holon.reply(msg, Performative.FAILURE,
                        ContentPayload.status(f"{reason} {task}"))

    def on_display(holon: Holon, msg: AclMessage):
        bridge_request(bridge.display.port, msg.content.get("task_name"))

    def on_teach(holon: Holon, msg: AclMessage):
        # muted drops replies only (lost confirms); commands still act,
        # so a master-side abort can always clean the arm up
        phase = msg.content.get("text")
        task = msg.content.get("task_name")
        try:
            if phase == "init":
                arm = ArmId.parse(msg.content.get("arm"))
                reply = bridge_request(bridge.record.port, f"{task},{arm.value}")
                if reply != "OK":
                    raise WorkcellError(reply.removeprefix("ERR ").strip())
            elif phase == "start":
                arm = ArmId.parse(msg.content.get("arm"))
                slave_state.session = body.start_recording(task, arm)
            elif phase == "stop":
                if slave_state.session is None:
                    raise WorkcellError("no recording session")
                body.stop_recording(slave_state.session)
            elif phase == "save":
                body.commit_profile(task)
                slave_state.session = None
            elif phase == "abort":
                if slave_state.session is not None:
                    body.abort_recording(slave_state.session)
                    slave_state.session = None
                else:
                    body.store.discard_draft(task)
                return  # abort is fire-and-forget
            else:
                raise WorkcellError(f"unknown teach phase: {phase!r}")
        except WorkcellError as exc:
            if slave_state.session is not None and phase in ("start", "stop"):
                body.abort_recording(slave_state.session)
                slave_state.session = None
            if not slave_state.muted:
                holon.reply(msg, Performative.FAILURE, ContentPayload.status(str(exc)))
            return
        if not slave_state.muted:
            holon.reply(msg, Performative.CONFIRM,
                        ContentPayload.status(phase, task_name=task))

    task = spawn(bus, AgentId(ROBOT_TASK, platform), [
        BehaviourSpec("execute", MessageFilter(performative=Performative.INFORM), on_execute),
    ], services=("robot_execution",))
    display = spawn(bus, AgentId(ROBOT_DISPLAY, platform), [
        BehaviourSpec("display", MessageFilter(performative=Performative.INFORM), on_display),
    ], services=("robot_display",))
    slave = spawn(bus, AgentId(TASK_SLAVE, platform), [
        BehaviourSpec("teach", MessageFilter(performative=Performative.INFORM), on_teach),
    ], services=("robot_teaching",))
    return RobotAgents(task, display, slave, slave_state)
