import pytest

from workcell.clock import Clock
from workcell.errors import (
    DuplicateName,
    NotFound,
    RecipeInUse,
    UnexpectedPropose,
)
from workcell.product import (
    OrderLog,
    OrderStatus,
    ProductCore,
    Recipe,
    RecipeStore,
    StepKind,
    TaskStep,
    format_step,
    parse_recipes,
    parse_step,
)
from workcell.robot.body import ArmId

from conftest import preload_profile


def laptop_recipe(name="laptop_v1"):
    return Recipe(name, (
        TaskStep(StepKind.ROBOT, "pick_base", ArmId.RIGHT, "hand over the base"),
        TaskStep(StepKind.WORKER, "prepare_base", None, "prepare the base"),
        TaskStep(StepKind.ROBOT, "pick_screen", ArmId.LEFT, "hand over the screen"),
    ))


@pytest.fixture
def core(tmp_path):
    return ProductCore(Clock(), RecipeStore(tmp_path / "recipes.store"),
                       OrderLog(tmp_path / "orders.log"))


class TestRecipeModel:
    def test_robot_step_requires_arm(self):
        with pytest.raises(ValueError):
            TaskStep(StepKind.ROBOT, "pick", None, "x")

    def test_recipe_needs_steps(self):
        with pytest.raises(ValueError):
            Recipe("empty", ())

    def test_step_line_round_trip(self):
        for step in laptop_recipe().steps:
            assert parse_step(format_step(step)) == step

    def test_description_with_spaces(self):
        step = parse_step('step worker fit_panel "press panel, then wipe it"')
        assert step.description == "press panel, then wipe it"


class TestRecipeStore:
    def test_create_list_delete(self, core):
        core.create_recipe(laptop_recipe())
        assert core.store.names() == ["laptop_v1"]
        core.delete_recipe("laptop_v1")
        assert core.store.names() == []

    def test_duplicate_create(self, core):
        core.create_recipe(laptop_recipe())
        with pytest.raises(DuplicateName):
            core.create_recipe(laptop_recipe())

    def test_update_missing(self, core):
        with pytest.raises(NotFound):
            core.update_recipe(laptop_recipe())

    def test_persistence_round_trip(self, core, tmp_path):
        core.create_recipe(laptop_recipe())
        reloaded = RecipeStore(tmp_path / "recipes.store")
        assert reloaded.recipes == core.store.recipes

    def test_update_preserves_step_order(self, core, tmp_path):
        core.create_recipe(laptop_recipe())
        reordered = Recipe("laptop_v1", tuple(reversed(laptop_recipe().steps)))
        core.update_recipe(reordered)
        reloaded = RecipeStore(tmp_path / "recipes.store")
        assert reloaded.get("laptop_v1").steps == reordered.steps

    def test_delete_recipe_of_running_order(self, core):
        core.create_recipe(laptop_recipe())
        core.enqueue("laptop_v1")
        with pytest.raises(RecipeInUse):
            core.delete_recipe("laptop_v1")
        with pytest.raises(RecipeInUse):
            core.update_recipe(laptop_recipe())

    def test_parse_ignores_comments_and_blanks(self):
        text = "# store\n\nrecipe one\nstep worker a \"d\"\n"
        assert list(parse_recipes(text)) == ["one"]


class TestExecutionStateMachine:
    def test_enqueue_on_empty_queue_starts_immediately(self, core):
        core.create_recipe(laptop_recipe())
        order, dispatch = core.enqueue("laptop_v1")
        assert order.status is OrderStatus.RUNNING
        assert dispatch.step_index == 0
        assert dispatch.step.arm is ArmId.RIGHT

    def test_second_order_queues(self, core):
        core.create_recipe(laptop_recipe())
        core.enqueue("laptop_v1")
        second, dispatch = core.enqueue("laptop_v1")
        assert second.status is OrderStatus.QUEUED
        assert dispatch is None

    def test_propose_advances_to_next_step(self, core):
        core.create_recipe(laptop_recipe())
        order, _ = core.enqueue("laptop_v1")
        action, dispatch, _ = core.on_propose(order.order_id, 0)
        assert action == "accept"
        assert dispatch.step.kind is StepKind.WORKER

    def test_propose_after_final_step_completes(self, core):
        core.create_recipe(laptop_recipe())
        order, _ = core.enqueue("laptop_v1")
        core.on_propose(order.order_id, 0)
        core.on_propose(order.order_id, 1)
        action, dispatch, completed = core.on_propose(order.order_id, 2)
        assert action == "reject"
        assert completed.status is OrderStatus.COMPLETED
        assert dispatch is None

    def test_step_mismatch_rejected(self, core):
        core.create_recipe(laptop_recipe())
        order, _ = core.enqueue("laptop_v1")
        with pytest.raises(UnexpectedPropose):
            core.on_propose(order.order_id, 2)

    def test_propose_without_running_order(self, core):
        with pytest.raises(UnexpectedPropose):
            core.on_propose("o9", 0)

    def test_completion_starts_next_queued(self, core):
        core.create_recipe(laptop_recipe())
        first, _ = core.enqueue("laptop_v1")
        core.clock.advance(1)
        second, _ = core.enqueue("laptop_v1")
        for step in range(3):
            action, dispatch, _ = core.on_propose(first.order_id, step)
        assert action == "reject"
        assert dispatch.order_id == second.order_id
        assert second.status is OrderStatus.RUNNING

    def test_unknown_recipe_enqueue(self, core):
        with pytest.raises(NotFound):
            core.enqueue("ghost")


class TestConstraints:
    def test_constraint_blocks_and_holds_propose(self, core):
        core.create_recipe(laptop_recipe())
        order, _ = core.enqueue("laptop_v1")
        blocked = core.on_constraint("part missing")
        assert blocked.status is OrderStatus.BLOCKED
        action, dispatch, _ = core.on_propose(order.order_id, 0)
        assert action == "held" and dispatch is None

    def test_resolve_releases_held_propose_at_same_step(self, core):
        core.create_recipe(laptop_recipe())
        order, _ = core.enqueue("laptop_v1")
        core.on_constraint("part missing")
        core.on_propose(order.order_id, 0)
        resumed, held = core.resolve()
        assert resumed.status is OrderStatus.RUNNING
        assert held == 0
        action, dispatch, _ = core.on_propose(order.order_id, held)
        assert action == "accept" and dispatch.step_index == 1

    def test_abort_fails_order_and_next_can_start(self, core):
        core.create_recipe(laptop_recipe())
        first, _ = core.enqueue("laptop_v1")
        core.clock.advance(1)
        second, _ = core.enqueue("laptop_v1")
        core.on_constraint("broken jig")
        core.fail_running("aborted", start_next=False)
        assert first.status is OrderStatus.FAILED
        dispatch = core._maybe_start()
        assert dispatch.order_id == second.order_id

    def test_constraint_with_no_running_order_is_recorded(self, core):
        assert core.on_constraint("note") is None
        assert core.constraints[0]["text"] == "note"


class TestFcfs:
    def test_five_orders_complete_in_enqueue_order(self, core):
        core.create_recipe(laptop_recipe())
        ids = []
        for _ in range(5):
            order, _ = core.enqueue("laptop_v1")
            ids.append(order.order_id)
            core.clock.advance(1)
        completed = []
        running = ids[0]
        while running is not None:
            order = core.orders[running]
            for step in range(3):
                _, dispatch, done = core.on_propose(running, step)
            completed.append(running)
            running = dispatch.order_id if dispatch else None
        assert completed == ids

    def test_order_log_survives_restart(self, core, tmp_path):
        core.create_recipe(laptop_recipe())
        order, _ = core.enqueue("laptop_v1")
        lines = OrderLog(tmp_path / "orders.log").lines()
        assert any("enqueued" in line for line in lines)
        assert any("started" in line for line in lines)


class TestEndToEnd:
    def test_order_flow_through_cell(self, cell):
        preload_profile(cell, "pick_base", ArmId.RIGHT, 600)
        preload_profile(cell, "pick_screen", ArmId.LEFT, 900)
        cell.worker_request("register w1 bench-3 assembly")
        spec = ";".join(format_step(s) for s in laptop_recipe().steps)
        cell.product_request(f"recipe_create laptop_v1 {spec}")
        reply = cell.product_request("enqueue laptop_v1")
        order_id = reply.content.get("order_id")
        assert cell.wait_quiescent()
        cell.worker_request("gesture Pick")
        cell.worker_request("gesture SwipeRight")
        assert cell.wait_quiescent()
        orders = {o["order_id"]: o for o in cell.snapshot()["orders"]}
        assert orders[order_id]["status"] == "Completed"

    def test_blocked_resume_through_cell(self, cell):
        preload_profile(cell, "fetch", ArmId.RIGHT, 100)
        cell.worker_request("register w1 bench-3")
        cell.product_request(
            'recipe_create two_step step worker prep "prep";step robot fetch Right "fetch"')
        cell.product_request("enqueue two_step")
        assert cell.wait_quiescent()
        cell.worker_request("gesture Pick")
        cell.worker_request("constraint part missing")
        assert cell.wait_quiescent()
        snap = cell.snapshot()
        assert snap["orders"][0]["status"] == "Blocked"
        assert snap["blocked_text"] == "part missing"
        # worker finishes while blocked; propose is held, no advance
        cell.worker_request("gesture SwipeRight")
        assert cell.wait_quiescent()
        assert cell.snapshot()["orders"][0]["status"] == "Blocked"
        cell.product_request("resolve")
        assert cell.wait_quiescent()
        assert cell.snapshot()["orders"][0]["status"] == "Completed"

    def test_abort_fails_order_and_starts_next(self, cell):
        preload_profile(cell, "fetch", ArmId.RIGHT, 100)
        cell.worker_request("register w1 bench-3")
        cell.product_request('recipe_create solo step worker prep "prep"')
        cell.product_request('recipe_create robotic step robot fetch Right "fetch"')
        cell.product_request("enqueue solo")
        assert cell.wait_quiescent()
        cell.product_request("enqueue robotic")
        assert cell.wait_quiescent()
        cell.product_request("abort")
        assert cell.wait_quiescent()
        orders = {o["recipe"]: o["status"] for o in cell.snapshot()["orders"]}
        assert orders == {"solo": "Failed", "robotic": "Completed"}
        # aborted worker task was cancelled, worker is free again
        assert cell.snapshot()["worker"]["task"] is None
