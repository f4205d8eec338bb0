"""Worker holon: registration, availability, gesture-driven task status.

The core is a function-block style component: inputs (registration,
assignment, gesture signals, constraints) arrive as stamped events, the
algorithm updates local state, and stamped output events plus messaging
effects come out. The agent layer maps effects onto bus messages so the
core stays directly testable.

Task status transitions are gated: a waiting task starts on pick or
place, only an in-progress task can pause or finish, and only lean
forward resumes a paused task (and only while the worker is available).
Anything else is an illegal transition that is logged and changes
nothing. Done is terminal.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Optional, Union

from workcell.clock import Clock
from workcell.errors import (
    AlreadyRegistered,
    NegativeDuration,
    NotFound,
    WorkerBusy,
    WorkerNotRegistered,
    WorkerUnavailableError,
)
from workcell.gesture import WorkerSignal

log = logging.getLogger(__name__)

WORKER_TASK = "worker"
WORKER_DISPLAY = "worker_display"


class TaskStatus(Enum):
    WAITING = "Waiting"
    IN_PROGRESS = "InProgress"
    PAUSED = "Paused"
    DONE = "Done"


# status -> signal -> outcome; "noop" keeps state, None is illegal.
TRANSITIONS: dict[TaskStatus, dict[WorkerSignal, Union[TaskStatus, str, None]]] = {
    TaskStatus.WAITING: {
        WorkerSignal.TASK_STARTED: TaskStatus.IN_PROGRESS,
        WorkerSignal.TASK_IN_PROGRESS: TaskStatus.IN_PROGRESS,
        WorkerSignal.TASK_DONE: None,
        WorkerSignal.TASK_PAUSED: None,
        WorkerSignal.TASK_RESUMED: None,
    },
    TaskStatus.IN_PROGRESS: {
        WorkerSignal.TASK_STARTED: "noop",
        WorkerSignal.TASK_IN_PROGRESS: "noop",
        WorkerSignal.TASK_DONE: TaskStatus.DONE,
        WorkerSignal.TASK_PAUSED: TaskStatus.PAUSED,
        WorkerSignal.TASK_RESUMED: "noop",
    },
    TaskStatus.PAUSED: {
        WorkerSignal.TASK_STARTED: None,
        WorkerSignal.TASK_IN_PROGRESS: None,
        WorkerSignal.TASK_DONE: None,
        WorkerSignal.TASK_PAUSED: "noop",
        WorkerSignal.TASK_RESUMED: TaskStatus.IN_PROGRESS,
    },
    TaskStatus.DONE: {
        WorkerSignal.TASK_STARTED: None,
        WorkerSignal.TASK_IN_PROGRESS: None,
        WorkerSignal.TASK_DONE: None,
        WorkerSignal.TASK_PAUSED: None,
        WorkerSignal.TASK_RESUMED: None,
    },
}


def task_duration(assign_stamp: int, done_stamp: int) -> int:
    """Task execution time: completion stamp minus assignment stamp."""
    if done_stamp < assign_stamp:
        raise NegativeDuration(f"{done_stamp} < {assign_stamp}")
    return done_stamp - assign_stamp


@dataclass(frozen=True)
class WorkerProfile:
    worker_id: str
    location: str
    capabilities: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.worker_id:
            raise ValueError("worker_id must be non-empty")
        object.__setattr__(self, "capabilities", frozenset(self.capabilities))


@dataclass(frozen=True)
class ConstraintReport:
    text: str
    stamp: int

    def __post_init__(self):
        if not self.text:
            raise ValueError("constraint text must be non-empty")


class FbEventName(Enum):
    REGISTER = "Register"
    DEREGISTER = "Deregister"
    AVAILABILITY_CHANGE = "AvailabilityChange"
    TASK_STATUS_CHANGE = "TaskStatusChange"
    TASK_ASSIGNMENT = "TaskAssignment"
    CONSTRAINT = "Constraint"


@dataclass(frozen=True)
class FbEvent:
    name: FbEventName
    data: dict
    stamp: int


@dataclass
class ActiveTask:
    order_id: str
    step_index: int
    task_name: str
    description: str
    conversation_id: str
    assigned_at: int
    status: TaskStatus = TaskStatus.WAITING
    done_at: Optional[int] = None


# -- effects the agent layer turns into messages --

@dataclass(frozen=True)
class SendCompletion:
    order_id: str
    step_index: int
    task_name: str
    conversation_id: str
    done_at: int


@dataclass(frozen=True)
class SendAssist:
    robot_task: str
    quantity: int
    tool: str


@dataclass(frozen=True)
class SendConstraint:
    report: ConstraintReport


@dataclass(frozen=True)
class BroadcastStatus:
    text: str


@dataclass(frozen=True)
class FailTask:
    conversation_id: str
    reason: str


Effect = Union[SendCompletion, SendAssist, SendConstraint, BroadcastStatus, FailTask]


class ToolMap:
    """tool name -> (robot task, quantity); first entry is the default."""

    def __init__(self, entries: dict[str, tuple[str, int]]):
        self.entries = dict(entries)
        self.default_tool = next(iter(entries), None)

    @classmethod
    def parse(cls, text: str) -> "ToolMap":
        entries: dict[str, tuple[str, int]] = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tool, sep, rest = line.partition("=")
            task, _, qty = rest.partition(",")
            if not sep or not task:
                raise ValueError(f"bad tools.map line: {line!r}")
            entries[tool.strip()] = (task.strip(), int(qty or "1"))
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path) -> "ToolMap":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def lookup(self, tool: str) -> tuple[str, int]:
        if tool not in self.entries:
            raise NotFound(f"no assist task for tool {tool!r}")
        return self.entries[tool]


class WorkerCore:
    """Sequential worker state machine; one instance per worker holon."""

    def __init__(self, clock: Clock, tools: Optional[ToolMap] = None):
        self.clock = clock
        self.tools = tools or ToolMap({})
        self.registered = False
        self.available = False
        self.profile: Optional[WorkerProfile] = None
        self.task: Optional[ActiveTask] = None
        self.events: list[FbEvent] = []
        self._assist_counter = 0
        self._constraint_counter = 0
        self._lock = threading.Lock()

    def _emit(self, name: FbEventName, **data) -> FbEvent:
        event = FbEvent(name, data, self.clock.now_ms())
        self.events.append(event)
        return event

    def _has_active_task(self) -> bool:
        return self.task is not None and self.task.status is not TaskStatus.DONE

    # -- operations --

    def on_register(self, profile: WorkerProfile) -> list[Effect]:
        if self.registered:
            raise AlreadyRegistered(profile.worker_id)
        self.registered = True
        self.available = True
        self.profile = profile
        self._emit(FbEventName.REGISTER, worker_id=profile.worker_id,
                   location=profile.location)
        self._emit(FbEventName.AVAILABILITY_CHANGE, available=True)
        return [BroadcastStatus(f"registered {profile.worker_id} available")]

    def on_deregister(self) -> list[Effect]:
        if not self.registered:
            raise WorkerNotRegistered("worker is not registered")
        effects: list[Effect] = []
        if self._has_active_task():
            effects.append(FailTask(self.task.conversation_id, "worker_deregistered"))
            self.task = None
        worker_id = self.profile.worker_id if self.profile else ""
        self.registered = False
        self.available = False
        self.profile = None
        self._emit(FbEventName.DEREGISTER, worker_id=worker_id)
        self._emit(FbEventName.AVAILABILITY_CHANGE, available=False)
        effects.append(BroadcastStatus(f"deregistered {worker_id}"))
        return effects

    def set_availability(self, available: bool) -> list[Effect]:
        if not self.registered:
            raise WorkerNotRegistered("worker is not registered")
        self.available = available
        self._emit(FbEventName.AVAILABILITY_CHANGE, available=available)
        return [BroadcastStatus(f"availability {'on' if available else 'off'}")]

    def on_assignment(self, order_id: str, step_index: int, task_name: str,
                      description: str, conversation_id: str) -> ActiveTask:
        if not self.registered:
            raise WorkerNotRegistered("worker is not registered")
        if not self.available:
            raise WorkerUnavailableError("worker is unavailable")
        if self._has_active_task():
            raise WorkerBusy(f"task {self.task.task_name} is {self.task.status.value}")
        task = ActiveTask(order_id, step_index, task_name, description,
                          conversation_id, assigned_at=self.clock.now_ms())
        self.task = task
        self._emit(FbEventName.TASK_ASSIGNMENT, task_name=task_name,
                   order_id=order_id, step_index=step_index)
        return task

    def on_worker_signal(self, signal: WorkerSignal,
                         tool: Optional[str] = None) -> tuple[str, list[Effect]]:
        """Apply one gesture-derived signal; returns (outcome, effects).

        outcome is the new task status value, "noop", or "illegal".
        """
        if not self.registered:
            raise WorkerNotRegistered("worker is not registered")

        if signal is WorkerSignal.WORKER_UNAVAILABLE:
            self.available = False
            self._emit(FbEventName.AVAILABILITY_CHANGE, available=False)
            effects: list[Effect] = [BroadcastStatus("availability off")]
            if self.task is not None and self.task.status is TaskStatus.IN_PROGRESS:
                self.task.status = TaskStatus.PAUSED
                self._emit(FbEventName.TASK_STATUS_CHANGE, status="Paused")
                return TaskStatus.PAUSED.value, effects
            return "noop", effects

        if signal is WorkerSignal.NEEDS_ASSISTANT:
            tool = tool or self.tools.default_tool
            if tool is None:
                log.warning("tool gesture with no tool map configured")
                return "illegal", []
            robot_task, quantity = self.tools.lookup(tool)
            self._assist_counter += 1
            return "noop", [SendAssist(robot_task, quantity, tool)]

        if self.task is None:
            log.warning("signal %s with no assigned task", signal.value)
            return "illegal", []
        outcome = TRANSITIONS[self.task.status][signal]
        if outcome is None:
            log.warning("illegal transition: %s + %s", self.task.status.value, signal.value)
            return "illegal", []
        if outcome == "noop":
            return "noop", []
        if outcome is TaskStatus.IN_PROGRESS and self.task.status is TaskStatus.PAUSED \
                and not self.available:
            log.warning("resume refused while unavailable")
            return "illegal", []
        self.task.status = outcome
        self._emit(FbEventName.TASK_STATUS_CHANGE, status=outcome.value)
        if outcome is TaskStatus.DONE:
            self.task.done_at = self.clock.now_ms()
            return outcome.value, [SendCompletion(
                self.task.order_id, self.task.step_index, self.task.task_name,
                self.task.conversation_id, self.task.done_at)]
        return outcome.value, []

    def on_constraint(self, text: str) -> list[Effect]:
        if not self.registered:
            raise WorkerNotRegistered("worker is not registered")
        report = ConstraintReport(text, self.clock.now_ms())
        self._emit(FbEventName.CONSTRAINT, text=text)
        self._constraint_counter += 1
        return [SendConstraint(report)]

    def abandon_task(self) -> Optional[str]:
        """Drop the active task (order aborted or failed upstream)."""
        if self.task is None:
            return None
        name = self.task.task_name
        self.task = None
        self._emit(FbEventName.TASK_STATUS_CHANGE, status="Abandoned", task_name=name)
        return name

    def next_assist_conversation(self) -> str:
        return f"assist/{self._assist_counter}"

    def next_constraint_conversation(self) -> str:
        return f"constraint/{self._constraint_counter}"

    def snapshot(self) -> dict:
        task = None
        if self.task is not None:
            task = {
                "order_id": self.task.order_id,
                "step_index": self.task.step_index,
                "task_name": self.task.task_name,
                "description": self.task.description,
                "status": self.task.status.value,
                "assigned_at": self.task.assigned_at,
                "done_at": self.task.done_at,
            }
        return {
            "registered": self.registered,
            "available": self.available,
            "worker_id": self.profile.worker_id if self.profile else None,
            "location": self.profile.location if self.profile else None,
            "capabilities": sorted(self.profile.capabilities) if self.profile else [],
            "task": task,
        }
