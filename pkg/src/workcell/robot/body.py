"""Joint-space simulation of a dual 7-DOF arm robot.

Each arm replays recorded motion profiles: timestamped joint waypoints
captured while teaching. Replay advances the workcell clock waypoint by
waypoint, setting the arm joints exactly at each offset, with linear
interpolation available for sampling between waypoints. The two arms are
independent; reach and payload exist only as config constants since the
simulation carries no geometry.

Profiles persist one file per task. A stopped recording is written as a
draft; only an explicit commit makes it visible to recipe execution, so
an aborted teaching session never leaks a half-taught task.
"""

from __future__ import annotations

import math
import os
import re
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Optional, Sequence

from workcell.clock import Clock
from workcell.errors import (
    ArmBusy,
    DuplicateTaskName,
    EmptyRecording,
    JointLimit,
    MalformedCommand,
    NotTeaching,
    UnknownTask,
)

JOINT_COUNT = 7
DEFAULT_JOINT_LIMITS = tuple((-math.pi, math.pi) for _ in range(JOINT_COUNT))

# Physical constants of the simulated cobot, used for validation hooks only.
ARM_REACH_M = 1.0
ARM_PAYLOAD_KG = 2.3

_TASK_NAME_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


class ArmId(Enum):
    LEFT = "Left"
    RIGHT = "Right"

    @classmethod
    def parse(cls, token: str) -> "ArmId":
        for arm in cls:
            if arm.value == token:
                return arm
        raise MalformedCommand(f"unknown arm: {token!r}")


class Gripper(Enum):
    OPEN = "Open"
    CLOSED = "Closed"


class ArmMode(Enum):
    IDLE = "Idle"
    TEACHING = "Teaching"
    EXECUTING = "Executing"


def check_task_name(name: str) -> str:
    if not _TASK_NAME_RE.match(name or ""):
        raise MalformedCommand(f"bad task name: {name!r}")
    return name


@dataclass(frozen=True)
class Waypoint:
    t_offset: int
    joints: tuple[float, ...]
    gripper: Gripper = Gripper.OPEN

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(float(j) for j in self.joints))
        if len(self.joints) != JOINT_COUNT:
            raise ValueError(f"waypoint needs {JOINT_COUNT} joints, got {len(self.joints)}")
        if self.t_offset < 0:
            raise ValueError("t_offset must be non-negative")


@dataclass(frozen=True)
class MotionProfile:
    task_name: str
    arm: ArmId
    waypoints: tuple[Waypoint, ...]
    recorded_at: int

    def __post_init__(self):
        object.__setattr__(self, "waypoints", tuple(self.waypoints))
        if not self.waypoints:
            raise ValueError("profile needs at least one waypoint")
        if self.waypoints[0].t_offset != 0:
            raise ValueError("first waypoint must be at t_offset 0")
        for a, b in zip(self.waypoints, self.waypoints[1:]):
            if b.t_offset <= a.t_offset:
                raise ValueError("waypoint offsets must strictly increase")

    @property
    def duration_ms(self) -> int:
        return self.waypoints[-1].t_offset

    def joints_at(self, t_offset_ms: float) -> tuple[float, ...]:
        """Linearly interpolated joints at an offset, clamped to the ends."""
        points = self.waypoints
        if t_offset_ms <= 0:
            return points[0].joints
        if t_offset_ms >= points[-1].t_offset:
            return points[-1].joints
        for before, after in zip(points, points[1:]):
            if t_offset_ms <= after.t_offset:
                span = after.t_offset - before.t_offset
                frac = (t_offset_ms - before.t_offset) / span
                return tuple(a + (b - a) * frac
                             for a, b in zip(before.joints, after.joints))
        return points[-1].joints


def format_profile(profile: MotionProfile) -> str:
    lines = [f"{profile.task_name} {profile.arm.value} {profile.recorded_at}"]
    for wp in profile.waypoints:
        joints = " ".join(repr(j) for j in wp.joints)
        lines.append(f"{wp.t_offset} {joints} {wp.gripper.value}")
    return "\n".join(lines) + "\n"


def parse_profile(text: str) -> MotionProfile:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty profile file")
    name, arm_token, recorded_at = lines[0].split()
    waypoints = []
    for line in lines[1:]:
        parts = line.split()
        if len(parts) != JOINT_COUNT + 2:
            raise ValueError(f"bad waypoint line: {line!r}")
        waypoints.append(Waypoint(int(parts[0]),
                                  tuple(float(p) for p in parts[1:-1]),
                                  Gripper(parts[-1])))
    return MotionProfile(name, ArmId.parse(arm_token), tuple(waypoints), int(recorded_at))


class ProfileStore:
    """One file per task under a directory; drafts commit by rename."""

    COMMITTED = ".profile"
    DRAFT = ".draft"

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, name: str, suffix: str) -> Path:
        return self.directory / f"{name}{suffix}"

    def save_draft(self, profile: MotionProfile):
        self._write(self._path(profile.task_name, self.DRAFT), format_profile(profile))

    def save(self, profile: MotionProfile):
        """Store a profile directly as committed (fixture preloading)."""
        self._write(self._path(profile.task_name, self.COMMITTED), format_profile(profile))

    def _write(self, path: Path, text: str):
        tmp = path.with_suffix(path.suffix + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)

    def commit(self, name: str) -> MotionProfile:
        draft = self._path(name, self.DRAFT)
        if not draft.exists():
            raise UnknownTask(f"no draft recording named {name}")
        os.replace(draft, self._path(name, self.COMMITTED))
        return self.load(name)

    def discard_draft(self, name: str):
        draft = self._path(name, self.DRAFT)
        if draft.exists():
            draft.unlink()

    def exists(self, name: str) -> bool:
        return self._path(name, self.COMMITTED).exists()

    def has_draft(self, name: str) -> bool:
        return self._path(name, self.DRAFT).exists()

    def load(self, name: str) -> MotionProfile:
        path = self._path(name, self.COMMITTED)
        if not path.exists():
            raise UnknownTask(name)
        return parse_profile(path.read_text(encoding="utf-8"))

    def names(self) -> list[str]:
        return sorted(p.name.removesuffix(self.COMMITTED)
                      for p in self.directory.glob(f"*{self.COMMITTED}"))


@dataclass
class ExecutionReport:
    task_name: str
    arm: ArmId
    duration_ms: int
    final_joints: tuple[float, ...]


@dataclass
class RecordingSession:
    name: str
    arm: ArmId
    started_at: int
    waypoints: list[Waypoint] = field(default_factory=list)
    open: bool = True


@dataclass
class _ArmSim:
    mode: ArmMode = ArmMode.IDLE
    joints: tuple[float, ...] = (0.0,) * JOINT_COUNT
    current_task: Optional[str] = None


ReplayObserver = Callable[[int, Waypoint], None]
GuidePoint = tuple[int, Sequence[float], Gripper]


class RobotBody:
    """Simulated dual-arm robot and its profile library."""

    def __init__(self, clock: Clock, store: ProfileStore,
                 joint_limits: Sequence[tuple[float, float]] = DEFAULT_JOINT_LIMITS):
        self.clock = clock
        self.store = store
        self.joint_limits = tuple(joint_limits)
        if len(self.joint_limits) != JOINT_COUNT:
            raise ValueError("joint_limits must cover all joints")
        self._arms = {ArmId.LEFT: _ArmSim(), ArmId.RIGHT: _ArmSim()}
        self._guided: dict[ArmId, list[GuidePoint]] = {ArmId.LEFT: [], ArmId.RIGHT: []}
        self.display_text = ""
        self._lock = threading.RLock()

    # -- inspection --

    def arm_mode(self, arm: ArmId) -> ArmMode:
        with self._lock:
            return self._arms[arm].mode

    def arm_joints(self, arm: ArmId) -> tuple[float, ...]:
        with self._lock:
            return self._arms[arm].joints

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "arms": {
                    arm.value: {
                        "mode": sim.mode.value,
                        "current_task": sim.current_task,
                        "joints": list(sim.joints),
                    }
                    for arm, sim in self._arms.items()
                },
                "display": self.display_text,
                "profiles": self.store.names(),
            }

    def _check_joints(self, joints: Sequence[float]):
        if len(joints) != JOINT_COUNT:
            raise JointLimit(f"need {JOINT_COUNT} joints, got {len(joints)}")
        for i, (value, (lo, hi)) in enumerate(zip(joints, self.joint_limits)):
            if not lo <= value <= hi:
                raise JointLimit(f"joint {i + 1} value {value} outside [{lo}, {hi}]")

    # -- teaching --

    def validate_start(self, name: str, arm: ArmId):
        """Preflight used by the record bridge endpoint."""
        check_task_name(name)
        with self._lock:
            if self.store.exists(name) or self.store.has_draft(name):
                raise DuplicateTaskName(name)
            if self._arms[arm].mode is not ArmMode.IDLE:
                raise ArmBusy(f"{arm.value} arm is {self._arms[arm].mode.value}")

    def queue_guided_motion(self, arm: ArmId, points: Sequence[GuidePoint]):
        """Stage the motion a human would guide during the next recording."""
        with self._lock:
            self._guided[arm] = list(points)

    def start_recording(self, name: str, arm: ArmId) -> RecordingSession:
        with self._lock:
            self.validate_start(name, arm)
            sim = self._arms[arm]
            sim.mode = ArmMode.TEACHING
            sim.current_task = name
            session = RecordingSession(name, arm, self.clock.now_ms())
            guided = self._guided[arm]
            self._guided[arm] = []
        for t_offset, joints, gripper in guided:
            self.jog(session, joints, gripper, at_offset=t_offset)
        return session

    def jog(self, session: RecordingSession, joints: Sequence[float],
            gripper: Gripper = Gripper.OPEN, at_offset: Optional[int] = None) -> Waypoint:
        """Append one waypoint, stamped from the session clock by default."""
        with self._lock:
            if not session.open:
                raise NotTeaching(session.name)
            self._check_joints(joints)
            offset = (self.clock.now_ms() - session.started_at
                      if at_offset is None else int(at_offset))
            if session.waypoints and offset <= session.waypoints[-1].t_offset:
                offset = session.waypoints[-1].t_offset + 1
            waypoint = Waypoint(offset, tuple(joints), gripper)
            session.waypoints.append(waypoint)
            self._arms[session.arm].joints = waypoint.joints
            return waypoint

    def stop_recording(self, session: RecordingSession) -> MotionProfile:
        with self._lock:
            if not session.open:
                raise NotTeaching(session.name)
            if not session.waypoints:
                session.open = False
                self._release_arm(session.arm)
                raise EmptyRecording(session.name)
            session.open = False
            base = session.waypoints[0].t_offset
            waypoints = tuple(Waypoint(wp.t_offset - base, wp.joints, wp.gripper)
                              for wp in session.waypoints)
            profile = MotionProfile(session.name, session.arm, waypoints, session.started_at)
            self.store.save_draft(profile)
            self._release_arm(session.arm)
            return profile

    def abort_recording(self, session: RecordingSession):
        with self._lock:
            session.open = False
            self.store.discard_draft(session.name)
            self._release_arm(session.arm)

    def commit_profile(self, name: str) -> MotionProfile:
        with self._lock:
            return self.store.commit(name)

    def _release_arm(self, arm: ArmId):
        sim = self._arms[arm]
        sim.mode = ArmMode.IDLE
        sim.current_task = None

    # -- execution --

    def execute_task(self, name: str, observer: Optional[ReplayObserver] = None) -> ExecutionReport:
        """Replay a committed profile on its arm, advancing the clock."""
        profile = self.store.load(name)
        for wp in profile.waypoints:
            self._check_joints(wp.joints)
        with self._lock:
            sim = self._arms[profile.arm]
            if sim.mode is not ArmMode.IDLE:
                raise ArmBusy(f"{profile.arm.value} arm is {sim.mode.value}")
            sim.mode = ArmMode.EXECUTING
            sim.current_task = name
        try:
            previous = 0
            for wp in profile.waypoints:
                if wp.t_offset > previous:
                    self.clock.advance(wp.t_offset - previous)
                    previous = wp.t_offset
                with self._lock:
                    sim.joints = wp.joints
                if observer is not None:
                    observer(self.clock.now_ms(), wp)
        finally:
            with self._lock:
                sim.mode = ArmMode.IDLE
                sim.current_task = None
        return ExecutionReport(name, profile.arm, profile.duration_ms,
                               profile.waypoints[-1].joints)

    # -- display --

    def display(self, name: str):
        with self._lock:
            self.display_text = name
