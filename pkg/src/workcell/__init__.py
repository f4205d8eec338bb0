"""Holonic control framework for a simulated worker-robot workcell.

Four holons (worker, order, product, robot resource) coordinate recipes
over a typed agent-message bus, with a simulated dual-arm robot behind a
socket bridge, a threshold hand-gesture classifier driving the worker
task state machine, FCFS order execution, and an operator gateway.
"""

from workcell.cell import ROBOT_PLATFORM, WORKER_PLATFORM, Workcell, WorkcellConfig
from workcell.clock import Clock, WallClock
from workcell.gesture import (
    ClassifierConfig,
    GestureEvent,
    HandFrame,
    WorkerSignal,
    classify,
    fold_stream,
    meaning,
    synth_frame,
)
from workcell.messaging import (
    AclMessage,
    AgentId,
    ContentKind,
    ContentPayload,
    MessageBus,
    MessageFilter,
    Performative,
    SnifferRecord,
)
from workcell.robot.body import ArmId, MotionProfile, RobotBody, Waypoint

__version__ = "0.1.0"

__all__ = [
    "AclMessage",
    "AgentId",
    "ArmId",
    "ClassifierConfig",
    "Clock",
    "ContentKind",
    "ContentPayload",
    "GestureEvent",
    "HandFrame",
    "MessageBus",
    "MessageFilter",
    "MotionProfile",
    "Performative",
    "ROBOT_PLATFORM",
    "RobotBody",
    "SnifferRecord",
    "WallClock",
    "Waypoint",
    "Workcell",
    "WorkcellConfig",
    "WorkerSignal",
    "WORKER_PLATFORM",
    "classify",
    "fold_stream",
    "meaning",
    "synth_frame",
]
