import pytest

from workcell.cell import Workcell, WorkcellConfig
from workcell.clock import Clock
from workcell.messaging.bus import MessageBus
from workcell.robot.body import ArmId, Gripper, MotionProfile, Waypoint


def make_cell(tmp_path, **overrides) -> Workcell:
    config = WorkcellConfig(tmp_path / "cell", record_port=0, execute_port=0,
                            display_port=0, **overrides)
    return Workcell(config).boot()


@pytest.fixture
def cell(tmp_path):
    cell = make_cell(tmp_path)
    yield cell
    cell.shutdown()


@pytest.fixture
def tcp_cell(tmp_path):
    cell = make_cell(tmp_path, two_platform=True)
    yield cell
    cell.shutdown()


@pytest.fixture
def clock():
    return Clock()


@pytest.fixture
def bus(clock):
    return MessageBus("worker_platform", clock)


def profile_of(name: str, arm: ArmId, duration_ms: int, base: float = 0.1) -> MotionProfile:
    waypoints = (Waypoint(0, (base,) * 7),
                 Waypoint(duration_ms, (base + 0.1,) * 7, Gripper.CLOSED))
    return MotionProfile(name, arm, waypoints, 0)


def preload_profile(cell: Workcell, name: str, arm: ArmId, duration_ms: int):
    cell.profile_store.save(profile_of(name, arm, duration_ms))
