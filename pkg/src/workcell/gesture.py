"""Hand-frame model and threshold gesture classification.

Frames arrive at a nominal 300 Hz. A frame classifies to at most one of
seven gestures; deliberate gestures win over posture, so the priority is
swipe, then tool, then pick/place, then lean. Pick/place use the arm
direction thresholds (x strictly beyond 0.2 with y at or below -0.5);
lean splits on hand pitch at 35 degrees, backward strictly above.

fold_stream turns the per-frame classification into an edge-triggered
event stream: an event is emitted only when the classification differs
from the previous frame's, so holding a gesture at sensor rate yields
one event.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence

from workcell.errors import InvalidFrame, OutOfOrderFrame

FRAME_PERIOD_S = 1.0 / 300.0
_UNIT_NORM_TOL = 1e-6


class HandType(Enum):
    LEFT = "Left"
    RIGHT = "Right"


class GestureEvent(Enum):
    """The seven recognized worker gestures."""

    PICK = "Pick"
    PLACE = "Place"
    SWIPE_RIGHT = "SwipeRight"
    SWIPE_LEFT = "SwipeLeft"
    LEAN_BACKWARD = "LeanBackward"
    LEAN_FORWARD = "LeanForward"
    TOOL = "Tool"


class WorkerSignal(Enum):
    """What a gesture tells the worker holon."""

    TASK_STARTED = "TaskStarted"
    TASK_IN_PROGRESS = "TaskInProgress"
    TASK_DONE = "TaskDone"
    TASK_PAUSED = "TaskPaused"
    TASK_RESUMED = "TaskResumed"
    WORKER_UNAVAILABLE = "WorkerUnavailable"
    NEEDS_ASSISTANT = "NeedsAssistant"


_MEANING = {
    GestureEvent.PICK: WorkerSignal.TASK_STARTED,
    GestureEvent.PLACE: WorkerSignal.TASK_IN_PROGRESS,
    GestureEvent.SWIPE_RIGHT: WorkerSignal.TASK_DONE,
    GestureEvent.SWIPE_LEFT: WorkerSignal.WORKER_UNAVAILABLE,
    GestureEvent.LEAN_BACKWARD: WorkerSignal.TASK_PAUSED,
    GestureEvent.LEAN_FORWARD: WorkerSignal.TASK_RESUMED,
    GestureEvent.TOOL: WorkerSignal.NEEDS_ASSISTANT,
}


def meaning(event: GestureEvent) -> WorkerSignal:
    """Total map from gesture to worker signal."""
    return _MEANING[event]


@dataclass(frozen=True)
class HandObs:
    """One observed hand: pitch around the x axis plus arm direction."""

    hand_type: HandType
    pitch_deg: float
    arm_dir: tuple[float, float, float]


@dataclass(frozen=True)
class SwipeObs:
    """Horizontal swipe component and speed in mm/s."""

    dir_x: float
    speed: float


@dataclass(frozen=True)
class HandFrame:
    frame_id: int
    t: float
    hands: tuple[HandObs, ...] = ()
    tool_count: int = 0
    swipes: tuple[SwipeObs, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "hands", tuple(self.hands))
        object.__setattr__(self, "swipes", tuple(self.swipes))
        if self.tool_count < 0:
            raise InvalidFrame("tool_count must be non-negative")


@dataclass(frozen=True)
class ClassifierConfig:
    x_threshold: float = 0.2
    y_threshold: float = -0.5
    pitch_threshold_deg: float = 35.0
    swipe_min_speed: float = 0.0

    def __post_init__(self):
        if self.x_threshold <= 0:
            raise ValueError("x_threshold must be positive")
        if not 0 < self.pitch_threshold_deg < 90:
            raise ValueError("pitch_threshold_deg must be in (0, 90)")


DEFAULT_CONFIG = ClassifierConfig()


def _check_hand(hand: HandObs):
    x, y, z = hand.arm_dir
    norm = math.sqrt(x * x + y * y + z * z)
    if abs(norm - 1.0) > _UNIT_NORM_TOL:
        raise InvalidFrame(f"arm_dir is not a unit vector: norm={norm}")
    if not -90.0 <= hand.pitch_deg <= 90.0:
        raise InvalidFrame(f"pitch out of range: {hand.pitch_deg}")


def classify(frame: HandFrame, cfg: ClassifierConfig = DEFAULT_CONFIG) -> Optional[GestureEvent]:
    """Classify one frame; None when nothing is observed."""
    for hand in frame.hands:
        _check_hand(hand)
    for swipe in frame.swipes:
        if swipe.speed >= cfg.swipe_min_speed:
            return GestureEvent.SWIPE_RIGHT if swipe.dir_x > 0 else GestureEvent.SWIPE_LEFT
    if frame.tool_count > 0:
        return GestureEvent.TOOL
    for hand in frame.hands:
        x, y, _ = hand.arm_dir
        if y <= cfg.y_threshold:
            if x > cfg.x_threshold:
                return GestureEvent.PICK
            if x < -cfg.x_threshold:
                return GestureEvent.PLACE
    if frame.hands:
        pitch = frame.hands[0].pitch_deg
        if pitch > cfg.pitch_threshold_deg:
            return GestureEvent.LEAN_BACKWARD
        return GestureEvent.LEAN_FORWARD
    return None


def fold_stream(frames: Iterable[HandFrame],
                cfg: ClassifierConfig = DEFAULT_CONFIG) -> Iterator[GestureEvent]:
    """Edge-triggered event stream over an ordered frame stream."""
    last_id: Optional[int] = None
    previous: Optional[GestureEvent] = None
    for frame in frames:
        if last_id is not None and frame.frame_id <= last_id:
            raise OutOfOrderFrame(f"frame {frame.frame_id} after {last_id}")
        last_id = frame.frame_id
        current = classify(frame, cfg)
        if current is not None and current != previous:
            yield current
        previous = current


class StreamFolder:
    """Incremental fold_stream for frame-at-a-time feeding."""

    def __init__(self, cfg: ClassifierConfig = DEFAULT_CONFIG):
        self.cfg = cfg
        self._last_id: Optional[int] = None
        self._previous: Optional[GestureEvent] = None

    def feed(self, frame: HandFrame) -> Optional[GestureEvent]:
        if self._last_id is not None and frame.frame_id <= self._last_id:
            raise OutOfOrderFrame(f"frame {frame.frame_id} after {self._last_id}")
        self._last_id = frame.frame_id
        current = classify(frame, self.cfg)
        emitted = current if current is not None and current != self._previous else None
        self._previous = current
        return emitted


def synth_frame(target: GestureEvent, frame_id: int = 0, t: float = 0.0) -> HandFrame:
    """A canonical frame that classifies back to the requested gesture."""
    z_pick = math.sqrt(1.0 - 0.3 ** 2 - 0.6 ** 2)
    z_flat = math.sqrt(1.0 - 0.2 ** 2)
    if target is GestureEvent.PICK:
        hands = (HandObs(HandType.RIGHT, 10.0, (0.3, -0.6, z_pick)),)
        return HandFrame(frame_id, t, hands=hands)
    if target is GestureEvent.PLACE:
        hands = (HandObs(HandType.RIGHT, 10.0, (-0.3, -0.6, z_pick)),)
        return HandFrame(frame_id, t, hands=hands)
    if target is GestureEvent.SWIPE_RIGHT:
        return HandFrame(frame_id, t, swipes=(SwipeObs(0.8, 500.0),))
    if target is GestureEvent.SWIPE_LEFT:
        return HandFrame(frame_id, t, swipes=(SwipeObs(-0.8, 500.0),))
    if target is GestureEvent.LEAN_BACKWARD:
        hands = (HandObs(HandType.RIGHT, 50.0, (0.0, 0.2, z_flat)),)
        return HandFrame(frame_id, t, hands=hands)
    if target is GestureEvent.LEAN_FORWARD:
        hands = (HandObs(HandType.RIGHT, 10.0, (0.0, 0.2, z_flat)),)
        return HandFrame(frame_id, t, hands=hands)
    if target is GestureEvent.TOOL:
        return HandFrame(frame_id, t, tool_count=1)
    raise ValueError(f"unknown gesture: {target}")


# -- frame-log file format --
# one frame per line:
#   frame_id t hands=[type,pitch,x,y,z;...] tools=N swipes=[dir_x,speed;...]

def format_frame(frame: HandFrame) -> str:
    hands = ";".join(
        f"{h.hand_type.value},{h.pitch_deg!r},{h.arm_dir[0]!r},{h.arm_dir[1]!r},{h.arm_dir[2]!r}"
        for h in frame.hands)
    swipes = ";".join(f"{s.dir_x!r},{s.speed!r}" for s in frame.swipes)
    return (f"{frame.frame_id} {frame.t!r} hands=[{hands}] "
            f"tools={frame.tool_count} swipes=[{swipes}]")


def parse_frame(line: str) -> HandFrame:
    tokens = line.split()
    if len(tokens) != 5:
        raise InvalidFrame(f"bad frame line: {line!r}")
    frame_id, t = int(tokens[0]), float(tokens[1])
    hands = tuple(
        HandObs(HandType(part.split(",")[0]),
                float(part.split(",")[1]),
                (float(part.split(",")[2]), float(part.split(",")[3]), float(part.split(",")[4])))
        for part in _bracket_items(tokens[2], "hands"))
    tools = int(tokens[3].removeprefix("tools="))
    swipes = tuple(
        SwipeObs(float(part.split(",")[0]), float(part.split(",")[1]))
        for part in _bracket_items(tokens[4], "swipes"))
    return HandFrame(frame_id, t, hands=hands, tool_count=tools, swipes=swipes)


def _bracket_items(token: str, key: str) -> list[str]:
    prefix = f"{key}=["
    if not token.startswith(prefix) or not token.endswith("]"):
        raise InvalidFrame(f"bad {key} field: {token!r}")
    body = token[len(prefix):-1]
    return [part for part in body.split(";") if part]


def write_frame_log(path, frames: Sequence[HandFrame]):
    with open(path, "w", encoding="utf-8") as fh:
        for frame in frames:
            fh.write(format_frame(frame) + "\n")


def read_frame_log(path) -> list[HandFrame]:
    with open(path, encoding="utf-8") as fh:
        return [parse_frame(line.rstrip("\n")) for line in fh if line.strip()]
