"""Deterministic end-to-end scenario driver.

A scenario file preloads recipes and motion profiles, then applies a
script of operator actions. Every action waits for the whole cell to go
quiescent first, so replaying a scenario yields an identical message
trace (timestamps aside). Traces render one line per sniffer record;
expectations match as an in-order subsequence over rendered records,
while golden files compare against the full rendering byte for byte.

Scenario file lines:

    scenario <name>
    profile <task> <arm> <t:j1,..,j7[,Grip]>;...      preloaded, committed
    recipe <name> <step>;<step>                        store-file step syntax
    do <action> [args]                                 script, in order
    expect <performative> <sender>-><receiver> [k=v]   trace pattern

Script actions: enqueue, advance, gesture, frame, constraint, register,
deregister, availability, guide, teach, resolve, abort, kill_robot,
boot_robot.
"""

from __future__ import annotations

import logging
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from workcell.cell import Workcell, WorkcellConfig
from workcell.errors import ScriptStuck, WorkcellError
from workcell.messaging.acl import Performative
from workcell.messaging.bus import SnifferRecord
from workcell.product import Recipe, parse_step
from workcell.robot.body import ArmId, Gripper, MotionProfile, Waypoint

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TracePattern:
    """One expected message: performative, roles, selected content keys."""

    performative: Performative
    sender: str
    receiver: str
    conversation: Optional[str] = None
    entries: dict = field(default_factory=dict)

    def matches(self, record: SnifferRecord) -> bool:
        msg = record.message
        if msg.performative is not self.performative:
            return False
        if msg.sender.name != self.sender:
            return False
        if self.receiver not in [r.name for r in msg.receivers]:
            return False
        if self.conversation is not None and msg.conversation_id != self.conversation:
            return False
        return all(msg.content.get(k) == v for k, v in self.entries.items())

    def __str__(self):
        extra = "".join(f" {k}={v}" for k, v in self.entries.items())
        conv = f" conv={self.conversation}" if self.conversation else ""
        return f"{self.performative.value} {self.sender}->{self.receiver}{conv}{extra}"


@dataclass
class Scenario:
    name: str
    profiles: list[MotionProfile] = field(default_factory=list)
    recipes: list[Recipe] = field(default_factory=list)
    script: list[str] = field(default_factory=list)
    expected: list[TracePattern] = field(default_factory=list)


@dataclass
class RunResult:
    name: str
    records: list[SnifferRecord]
    trace_lines: list[str]
    passed: bool
    divergence: Optional[str]
    snapshot: dict

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else f"fail: {self.divergence}"


def render_record(record: SnifferRecord) -> str:
    """One trace line; timestamps and seq numbers are masked out."""
    msg = record.message
    receivers = ",".join(r.name for r in msg.receivers)
    head = (f"{msg.performative.value} {msg.sender.name}->{receivers} "
            f"{msg.conversation_id} {msg.content.kind.value}")
    entries = " ".join(f"{k}={v}" for k, v in msg.content.entries.items())
    return f"{head} {entries}".rstrip()


def render_trace(records: list[SnifferRecord]) -> str:
    return "".join(render_record(r) + "\n" for r in records)


def parse_motion(spec: str) -> list[tuple[int, list[float], Gripper]]:
    points = []
    for chunk in spec.split(";"):
        if not chunk:
            continue
        offset, _, rest = chunk.partition(":")
        values = rest.split(",")
        gripper = Gripper.OPEN
        if values and values[-1] in (Gripper.OPEN.value, Gripper.CLOSED.value):
            gripper = Gripper(values[-1])
            values = values[:-1]
        points.append((int(offset), [float(v) for v in values], gripper))
    return points


def parse_scenario(text: str, name_hint: str = "scenario") -> Scenario:
    scenario = Scenario(name_hint)
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        keyword, _, rest = line.partition(" ")
        if keyword == "scenario":
            scenario.name = rest.strip()
        elif keyword == "profile":
            task, arm, motion = rest.split(None, 2)
            waypoints = tuple(Waypoint(t, tuple(j), g) for t, j, g in parse_motion(motion))
            scenario.profiles.append(MotionProfile(task, ArmId.parse(arm), waypoints, 0))
        elif keyword == "recipe":
            recipe_name, _, steps_text = rest.partition(" ")
            steps = tuple(parse_step(part) for part in steps_text.split(";") if part.strip())
            scenario.recipes.append(Recipe(recipe_name, steps))
        elif keyword == "do":
            scenario.script.append(rest.strip())
        elif keyword == "expect":
            scenario.expected.append(_parse_pattern(rest.strip()))
        else:
            raise ValueError(f"unknown scenario line: {line!r}")
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), path.stem)


def _parse_pattern(text: str) -> TracePattern:
    parts = text.split()
    performative = Performative.decode(parts[0])
    sender, _, receiver = parts[1].partition("->")
    conversation = None
    entries = {}
    for token in parts[2:]:
        key, _, value = token.partition("=")
        if key == "conv":
            conversation = value
        else:
            entries[key] = value
    return TracePattern(performative, sender, receiver, conversation, entries)


class ScenarioRunner:
    """Applies a scenario to a freshly booted workcell."""

    def __init__(self, scenario: Scenario, *, two_platform: bool = False,
                 data_dir: Optional[Path] = None, quiescence_timeout_s: float = 10.0):
        self.scenario = scenario
        self.two_platform = two_platform
        self.data_dir = data_dir
        self.quiescence_timeout_s = quiescence_timeout_s

    def run(self) -> RunResult:
        with tempfile.TemporaryDirectory() as tmp:
            data_dir = self.data_dir or Path(tmp) / "cell"
            config = WorkcellConfig(data_dir, two_platform=self.two_platform,
                                    record_port=0, execute_port=0, display_port=0)
            cell = Workcell(config)
            self._preload(config.data_dir)
            cell.boot()
            try:
                tap = cell.trace.subscribe()
                for index, action in enumerate(self.scenario.script):
                    self._settle(cell, f"before step {index}: {action}")
                    self._apply(cell, action)
                self._settle(cell, "after final step")
                records = [r for r in cell.trace.records()]
                snapshot = cell.snapshot()
            finally:
                cell.shutdown()
        passed, divergence = match_patterns(self.scenario.expected, records)
        return RunResult(self.scenario.name, records,
                         render_trace(records).splitlines(), passed, divergence,
                         snapshot)

    def _preload(self, data_dir: Path):
        data_dir.mkdir(parents=True, exist_ok=True)
        if self.scenario.recipes:
            from workcell.product import RecipeStore
            store = RecipeStore(data_dir / "recipes.store")
            for recipe in self.scenario.recipes:
                store.create(recipe)
        if self.scenario.profiles:
            from workcell.robot.body import ProfileStore
            store = ProfileStore(data_dir / "profiles")
            for profile in self.scenario.profiles:
                store.save(profile)

    def _settle(self, cell: Workcell, where: str):
        if not cell.wait_quiescent(self.quiescence_timeout_s):
            raise ScriptStuck(f"cell never went quiescent {where}")

    def _apply(self, cell: Workcell, action: str):
        verb, _, rest = action.partition(" ")
        try:
            if verb == "advance":
                cell.clock.advance(int(rest))
            elif verb == "enqueue":
                self._request_ok(cell.product_request(f"enqueue {rest}"), action)
            elif verb in ("resolve", "abort"):
                self._request_ok(cell.product_request(action), action)
            elif verb in ("gesture", "frame", "constraint", "register",
                          "deregister", "availability"):
                self._request_ok(cell.worker_request(action), action)
            elif verb == "teach":
                self._request_ok(cell.master_request(action), action)
            elif verb == "guide":
                arm_token, _, motion = rest.partition(" ")
                cell.body.queue_guided_motion(ArmId.parse(arm_token), parse_motion(motion))
            elif verb == "kill_robot":
                cell.kill_robot_platform()
            elif verb == "boot_robot":
                cell.boot_robot_platform()
            else:
                raise ScriptStuck(f"unknown action: {action!r}")
        except WorkcellError as exc:
            if isinstance(exc, ScriptStuck):
                raise
            raise ScriptStuck(f"action {action!r} failed: {exc}") from exc

    def _request_ok(self, reply, action: str):
        if reply.performative is Performative.FAILURE:
            raise ScriptStuck(f"action {action!r} refused: {reply.content.get('text')}")


def match_patterns(patterns: list[TracePattern],
                   records: list[SnifferRecord]) -> tuple[bool, Optional[str]]:
    """Match patterns as an in-order subsequence of the records."""
    position = 0
    for index, pattern in enumerate(patterns):
        while position < len(records) and not pattern.matches(records[position]):
            position += 1
        if position >= len(records):
            return False, f"pattern {index} never matched: {pattern}"
        position += 1
    return True, None


def run_scenario(scenario: Scenario, *, two_platform: bool = False,
                 data_dir: Optional[Path] = None) -> RunResult:
    return ScenarioRunner(scenario, two_platform=two_platform, data_dir=data_dir).run()
