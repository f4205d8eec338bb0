import pytest

from workcell.clock import Clock
from workcell.errors import (
    AlreadyRegistered,
    NegativeDuration,
    WorkerBusy,
    WorkerNotRegistered,
    WorkerUnavailableError,
)
from workcell.gesture import WorkerSignal
from workcell.worker import (
    BroadcastStatus,
    ConstraintReport,
    FailTask,
    SendAssist,
    SendCompletion,
    SendConstraint,
    TaskStatus,
    ToolMap,
    WorkerCore,
    WorkerProfile,
    task_duration,
)

TOOLS = ToolMap({"screwdriver": ("bring_screws", 20)})


def registered_core(clock=None) -> WorkerCore:
    core = WorkerCore(clock or Clock(), TOOLS)
    core.on_register(WorkerProfile("w1", "bench-3", frozenset({"assembly"})))
    return core


def core_with_task(status: TaskStatus, clock=None) -> WorkerCore:
    core = registered_core(clock)
    core.on_assignment("o1", 0, "prepare_base", "prep", "order/o1/step/0")
    if status is TaskStatus.IN_PROGRESS:
        core.on_worker_signal(WorkerSignal.TASK_STARTED)
    elif status is TaskStatus.PAUSED:
        core.on_worker_signal(WorkerSignal.TASK_STARTED)
        core.on_worker_signal(WorkerSignal.TASK_PAUSED)
    elif status is TaskStatus.DONE:
        core.on_worker_signal(WorkerSignal.TASK_STARTED)
        core.on_worker_signal(WorkerSignal.TASK_DONE)
    assert core.task.status is status
    return core


class TestRegistration:
    def test_register_sets_availability_and_broadcasts(self):
        core = WorkerCore(Clock(), TOOLS)
        effects = core.on_register(WorkerProfile("w1", "bench-3", frozenset({"assembly"})))
        assert core.registered and core.available
        assert effects == [BroadcastStatus("registered w1 available")]

    def test_register_twice(self):
        core = registered_core()
        with pytest.raises(AlreadyRegistered):
            core.on_register(WorkerProfile("w1", "bench-3"))

    def test_deregister_clears_availability(self):
        core = registered_core()
        effects = core.on_deregister()
        assert not core.registered and not core.available
        assert BroadcastStatus("deregistered w1") in effects

    def test_deregister_with_active_task_fails_it(self):
        core = core_with_task(TaskStatus.IN_PROGRESS)
        effects = core.on_deregister()
        fail = [e for e in effects if isinstance(e, FailTask)]
        assert len(fail) == 1
        assert fail[0].conversation_id == "order/o1/step/0"
        assert fail[0].reason == "worker_deregistered"

    def test_empty_worker_id_rejected(self):
        with pytest.raises(ValueError):
            WorkerProfile("", "bench")


class TestAssignment:
    def test_assignment_while_idle(self):
        clock = Clock(start_ms=1000)
        core = registered_core(clock)
        task = core.on_assignment("o1", 0, "t", "d", "order/o1/step/0")
        assert task.status is TaskStatus.WAITING
        assert task.assigned_at == 1000

    def test_assignment_while_busy(self):
        core = core_with_task(TaskStatus.IN_PROGRESS)
        with pytest.raises(WorkerBusy):
            core.on_assignment("o2", 0, "t", "d", "order/o2/step/0")

    def test_assignment_while_unavailable(self):
        core = registered_core()
        core.on_worker_signal(WorkerSignal.WORKER_UNAVAILABLE)
        with pytest.raises(WorkerUnavailableError):
            core.on_assignment("o1", 0, "t", "d", "order/o1/step/0")

    def test_assignment_after_done_is_allowed(self):
        core = core_with_task(TaskStatus.DONE)
        task = core.on_assignment("o2", 0, "t2", "d", "order/o2/step/0")
        assert task.status is TaskStatus.WAITING

    def test_unregistered_assignment(self):
        core = WorkerCore(Clock(), TOOLS)
        with pytest.raises(WorkerNotRegistered):
            core.on_assignment("o1", 0, "t", "d", "c")


class TestSignals:
    def test_waiting_plus_pick_starts(self):
        core = core_with_task(TaskStatus.WAITING)
        outcome, effects = core.on_worker_signal(WorkerSignal.TASK_STARTED)
        assert outcome == "InProgress" and effects == []

    def test_waiting_plus_place_starts(self):
        core = core_with_task(TaskStatus.WAITING)
        outcome, _ = core.on_worker_signal(WorkerSignal.TASK_IN_PROGRESS)
        assert outcome == "InProgress"

    def test_done_emits_completion_with_stamp(self):
        clock = Clock()
        core = core_with_task(TaskStatus.IN_PROGRESS, clock)
        clock.advance(3500)
        outcome, effects = core.on_worker_signal(WorkerSignal.TASK_DONE)
        assert outcome == "Done"
        completion = effects[0]
        assert isinstance(completion, SendCompletion)
        assert completion.done_at == 3500
        assert completion.conversation_id == "order/o1/step/0"

    def test_done_while_paused_is_illegal(self):
        core = core_with_task(TaskStatus.PAUSED)
        outcome, effects = core.on_worker_signal(WorkerSignal.TASK_DONE)
        assert outcome == "illegal" and effects == []
        assert core.task.status is TaskStatus.PAUSED

    def test_done_is_terminal(self):
        core = core_with_task(TaskStatus.DONE)
        for signal in (WorkerSignal.TASK_STARTED, WorkerSignal.TASK_IN_PROGRESS,
                       WorkerSignal.TASK_DONE, WorkerSignal.TASK_PAUSED,
                       WorkerSignal.TASK_RESUMED):
            outcome, _ = core.on_worker_signal(signal)
            assert outcome == "illegal"
            assert core.task.status is TaskStatus.DONE

    def test_pause_resume_bracket(self):
        core = core_with_task(TaskStatus.IN_PROGRESS)
        assert core.on_worker_signal(WorkerSignal.TASK_PAUSED)[0] == "Paused"
        assert core.on_worker_signal(WorkerSignal.TASK_RESUMED)[0] == "InProgress"

    def test_pick_does_not_resume_paused_task(self):
        core = core_with_task(TaskStatus.PAUSED)
        outcome, _ = core.on_worker_signal(WorkerSignal.TASK_STARTED)
        assert outcome == "illegal"
        assert core.task.status is TaskStatus.PAUSED

    def test_swipe_left_pauses_and_marks_unavailable(self):
        core = core_with_task(TaskStatus.IN_PROGRESS)
        outcome, _ = core.on_worker_signal(WorkerSignal.WORKER_UNAVAILABLE)
        assert outcome == "Paused"
        assert not core.available
        assert core.task.status is TaskStatus.PAUSED

    def test_resume_requires_availability(self):
        core = core_with_task(TaskStatus.IN_PROGRESS)
        core.on_worker_signal(WorkerSignal.WORKER_UNAVAILABLE)
        outcome, _ = core.on_worker_signal(WorkerSignal.TASK_RESUMED)
        assert outcome == "illegal"
        core.set_availability(True)
        outcome, _ = core.on_worker_signal(WorkerSignal.TASK_RESUMED)
        assert outcome == "InProgress"

    def test_tool_looks_up_assist_task(self):
        core = core_with_task(TaskStatus.IN_PROGRESS)
        outcome, effects = core.on_worker_signal(WorkerSignal.NEEDS_ASSISTANT,
                                                 tool="screwdriver")
        assert outcome == "noop"
        assert effects == [SendAssist("bring_screws", 20, "screwdriver")]

    def test_tool_uses_default_from_map(self):
        core = registered_core()
        _, effects = core.on_worker_signal(WorkerSignal.NEEDS_ASSISTANT)
        assert effects[0].robot_task == "bring_screws"

    def test_stamps_never_decrease(self):
        clock = Clock()
        core = core_with_task(TaskStatus.WAITING, clock)
        clock.advance(10)
        core.on_worker_signal(WorkerSignal.TASK_STARTED)
        stamps = [e.stamp for e in core.events]
        assert stamps == sorted(stamps)


class TestConstraints:
    def test_constraint_forwarded_with_stamp(self):
        clock = Clock(start_ms=77)
        core = registered_core(clock)
        effects = core.on_constraint("part missing")
        assert effects == [SendConstraint(ConstraintReport("part missing", 77))]

    def test_empty_text_rejected_at_construction(self):
        with pytest.raises(ValueError):
            ConstraintReport("", 0)

    def test_constraint_while_idle_still_forwards(self):
        core = registered_core()
        assert isinstance(core.on_constraint("anything")[0], SendConstraint)


class TestDuration:
    def test_subtraction(self):
        assert task_duration(1000, 4500) == 3500

    def test_zero(self):
        assert task_duration(123, 123) == 0

    def test_negative_rejected(self):
        with pytest.raises(NegativeDuration):
            task_duration(100, 99)


class TestToolMap:
    def test_parse_lines(self):
        tools = ToolMap.parse("# comment\nscrewdriver=bring_screws,20\nwrench=bring_bolts,8\n")
        assert tools.lookup("wrench") == ("bring_bolts", 8)
        assert tools.default_tool == "screwdriver"

    def test_bad_line_rejected(self):
        with pytest.raises(ValueError):
            ToolMap.parse("not a mapping\n")
