import math
import threading

import pytest

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
from workcell.robot.body import (
    ArmId,
    ArmMode,
    Gripper,
    MotionProfile,
    ProfileStore,
    RobotBody,
    Waypoint,
    format_profile,
    parse_profile,
)


@pytest.fixture
def body(tmp_path):
    return RobotBody(Clock(), ProfileStore(tmp_path / "profiles"))


def record_simple(body, name="pick_base", arm=ArmId.RIGHT, offsets=(0, 100, 200)):
    session = body.start_recording(name, arm)
    for i, offset in enumerate(offsets):
        body.jog(session, [(i + 1) / 10] * 7, Gripper.OPEN, at_offset=offset)
    profile = body.stop_recording(session)
    body.commit_profile(name)
    return profile


class TestProfileModel:
    def test_needs_seven_joints(self):
        with pytest.raises(ValueError):
            Waypoint(0, (0.0,) * 6)

    def test_first_waypoint_at_zero(self):
        with pytest.raises(ValueError):
            MotionProfile("t", ArmId.LEFT, (Waypoint(5, (0.0,) * 7),), 0)

    def test_offsets_strictly_increase(self):
        with pytest.raises(ValueError):
            MotionProfile("t", ArmId.LEFT,
                          (Waypoint(0, (0.0,) * 7), Waypoint(0, (0.1,) * 7)), 0)

    def test_interpolation_midpoint(self):
        profile = MotionProfile("t", ArmId.LEFT,
                                (Waypoint(0, (0.0,) * 7), Waypoint(100, (1.0,) * 7)), 0)
        assert profile.joints_at(50) == pytest.approx((0.5,) * 7)
        assert profile.joints_at(-5) == (0.0,) * 7
        assert profile.joints_at(500) == (1.0,) * 7


class TestRecording:
    def test_start_sets_teaching_mode(self, body):
        body.start_recording("pick_base", ArmId.RIGHT)
        assert body.arm_mode(ArmId.RIGHT) is ArmMode.TEACHING
        assert body.arm_mode(ArmId.LEFT) is ArmMode.IDLE

    def test_start_while_busy(self, body):
        body.start_recording("a", ArmId.RIGHT)
        with pytest.raises(ArmBusy):
            body.start_recording("b", ArmId.RIGHT)

    def test_duplicate_name(self, body):
        record_simple(body, "taken")
        with pytest.raises(DuplicateTaskName):
            body.start_recording("taken", ArmId.LEFT)

    def test_draft_name_also_taken(self, body):
        session = body.start_recording("draft", ArmId.RIGHT)
        body.jog(session, [0.0] * 7)
        body.stop_recording(session)
        with pytest.raises(DuplicateTaskName):
            body.start_recording("draft", ArmId.RIGHT)

    def test_jogs_strictly_increase(self, body):
        session = body.start_recording("t", ArmId.RIGHT)
        for offset in (0, 100, 200):
            body.jog(session, [0.1] * 7, at_offset=offset)
        offsets = [w.t_offset for w in session.waypoints]
        assert offsets == [0, 100, 200]

    def test_jog_outside_limits(self, body):
        session = body.start_recording("t", ArmId.RIGHT)
        with pytest.raises(JointLimit):
            body.jog(session, [4.0] * 7)

    def test_jog_after_stop(self, body):
        session = body.start_recording("t", ArmId.RIGHT)
        body.jog(session, [0.0] * 7)
        body.stop_recording(session)
        with pytest.raises(NotTeaching):
            body.jog(session, [0.1] * 7)

    def test_stop_with_no_waypoints(self, body):
        session = body.start_recording("t", ArmId.RIGHT)
        with pytest.raises(EmptyRecording):
            body.stop_recording(session)
        assert body.arm_mode(ArmId.RIGHT) is ArmMode.IDLE

    def test_stop_persists_draft_commit_makes_visible(self, body):
        session = body.start_recording("t", ArmId.RIGHT)
        body.jog(session, [0.1] * 7)
        body.stop_recording(session)
        assert not body.store.exists("t")
        assert body.store.has_draft("t")
        body.commit_profile("t")
        assert body.store.exists("t")
        assert body.store.load("t").waypoints[0].joints == (0.1,) * 7

    def test_abort_discards_draft(self, body):
        session = body.start_recording("t", ArmId.RIGHT)
        body.jog(session, [0.1] * 7)
        body.stop_recording(session)
        body.abort_recording(session)
        assert not body.store.has_draft("t")
        assert not body.store.exists("t")

    def test_guided_motion_applied_on_start(self, body):
        body.queue_guided_motion(ArmId.RIGHT, [(0, [0.1] * 7, Gripper.OPEN),
                                               (500, [0.2] * 7, Gripper.CLOSED)])
        session = body.start_recording("guided", ArmId.RIGHT)
        assert [w.t_offset for w in session.waypoints] == [0, 500]
        profile = body.stop_recording(session)
        assert profile.waypoints[-1].gripper is Gripper.CLOSED

    def test_bad_task_name(self, body):
        with pytest.raises(MalformedCommand):
            body.start_recording("has space", ArmId.RIGHT)


class TestExecution:
    def test_replay_reports_duration_and_final_joints(self, body):
        record_simple(body, offsets=(0, 900, 1800))
        report = body.execute_task("pick_base")
        assert report.duration_ms == 1800
        assert report.final_joints == (0.3,) * 7
        assert body.arm_joints(ArmId.RIGHT) == pytest.approx((0.3,) * 7)

    def test_replay_hits_every_waypoint_on_the_clock(self, body):
        profile = record_simple(body, offsets=(0, 250, 600))
        start = body.clock.now_ms()
        seen = []
        body.execute_task("pick_base", observer=lambda t, wp: seen.append((t, wp)))
        assert [t - start for t, _ in seen] == [0, 250, 600]
        for (_, got), want in zip(seen, profile.waypoints):
            assert got.joints == want.joints

    def test_clock_advances_by_duration(self, body):
        record_simple(body, offsets=(0, 1800))
        before = body.clock.now_ms()
        body.execute_task("pick_base")
        assert body.clock.now_ms() - before == 1800

    def test_unknown_task(self, body):
        with pytest.raises(UnknownTask):
            body.execute_task("ghost")

    def test_draft_not_executable(self, body):
        session = body.start_recording("draft", ArmId.RIGHT)
        body.jog(session, [0.1] * 7)
        body.stop_recording(session)
        with pytest.raises(UnknownTask):
            body.execute_task("draft")

    def test_busy_arm_refuses_but_other_arm_runs(self, body):
        record_simple(body, "left_task", ArmId.LEFT, offsets=(0, 100))
        record_simple(body, "right_task", ArmId.RIGHT, offsets=(0, 100))
        body.start_recording("hold_left", ArmId.LEFT)
        with pytest.raises(ArmBusy):
            body.execute_task("left_task")
        assert body.execute_task("right_task").duration_ms == 100

    def test_concurrent_executes_on_both_arms(self, body):
        record_simple(body, "left_task", ArmId.LEFT, offsets=(0, 150))
        record_simple(body, "right_task", ArmId.RIGHT, offsets=(0, 150))
        results = {}

        def run(name):
            results[name] = body.execute_task(name)

        threads = [threading.Thread(target=run, args=(n,))
                   for n in ("left_task", "right_task")]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert results["left_task"].duration_ms == 150
        assert results["right_task"].duration_ms == 150

    def test_profile_outside_limits_never_replayed(self, body, tmp_path):
        narrow = RobotBody(Clock(), body.store,
                           joint_limits=tuple((-0.25, 0.25) for _ in range(7)))
        record_simple(body, offsets=(0, 100, 200))  # joints up to 0.3
        with pytest.raises(JointLimit):
            narrow.execute_task("pick_base")


class TestDisplay:
    def test_display_text(self, body):
        body.display("pick_base")
        assert body.display_text == "pick_base"

    def test_display_clear(self, body):
        body.display("x")
        body.display("")
        assert body.display_text == ""


class TestPersistence:
    def test_store_load_round_trip(self, body):
        profile = record_simple(body)
        assert body.store.load("pick_base") == profile

    def test_file_bytes_identical_after_round_trip(self, tmp_path):
        store = ProfileStore(tmp_path / "a")
        profile = MotionProfile("t", ArmId.LEFT, (
            Waypoint(0, (0.123456789, -1.5, 0.0, 2.25, -0.000001, 1e-9, 3.0)),
            Waypoint(17, (0.3,) * 7, Gripper.CLOSED),
        ), 12345)
        store.save(profile)
        first = (tmp_path / "a" / "t.profile").read_bytes()
        loaded = store.load("t")
        other = ProfileStore(tmp_path / "b")
        other.save(loaded)
        second = (tmp_path / "b" / "t.profile").read_bytes()
        assert first == second

    def test_parse_format_inverse(self):
        profile = MotionProfile("t", ArmId.RIGHT, (
            Waypoint(0, tuple(math.sin(i) for i in range(7))),
            Waypoint(33, tuple(math.cos(i) for i in range(7)), Gripper.CLOSED),
        ), 99)
        assert parse_profile(format_profile(profile)) == profile
