"""Product holon: recipe library, order queue, recipe execution.

Recipes persist in one human-readable store file, rewritten atomically
before any acknowledgement; orders append to a write-ahead log. Order
execution walks the recipe strictly sequentially: the first step goes
out as an Agree, every received Propose answers with an Accept-Proposal
carrying the next step, and the Propose after the final step is answered
with a Reject-Proposal that closes the order. One order runs at a time;
the earliest queued order starts as soon as the workcell frees up.

A production constraint blocks the running order: a Propose that arrives
while blocked is held, and an operator resolve releases it at the same
step. Abort fails the order; the next queued order starts once the order
holon has acknowledged tearing the aborted step down.
"""

from __future__ import annotations

import logging
import os
import re
import threading
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Optional

from workcell.clock import Clock
from workcell.errors import (
    DuplicateName,
    NotFound,
    RecipeInUse,
    UnexpectedPropose,
    WorkcellError,
)
from workcell.messaging.acl import (
    AclMessage,
    AgentId,
    ContentKind,
    ContentPayload,
    Performative,
)
from workcell.messaging.bus import MessageBus, MessageFilter
from workcell.robot.body import ArmId
from workcell.runtime import BehaviourSpec, Holon, spawn

log = logging.getLogger(__name__)

PRODUCT_AGENT = "product"


class StepKind(Enum):
    WORKER = "worker"
    ROBOT = "robot"


@dataclass(frozen=True)
class TaskStep:
    kind: StepKind
    task_name: str
    arm: Optional[ArmId] = None
    description: str = ""

    def __post_init__(self):
        if self.kind is StepKind.ROBOT and self.arm is None:
            raise ValueError(f"robot step {self.task_name} needs an arm")
        if not self.task_name:
            raise ValueError("step needs a task name")


@dataclass(frozen=True)
class Recipe:
    name: str
    steps: tuple[TaskStep, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.name:
            raise ValueError("recipe needs a name")
        if not self.steps:
            raise ValueError("recipe needs at least one step")


class OrderStatus(Enum):
    QUEUED = "Queued"
    RUNNING = "Running"
    BLOCKED = "Blocked"
    COMPLETED = "Completed"
    FAILED = "Failed"


@dataclass
class ProductionOrder:
    order_id: str
    recipe_name: str
    enqueued_at: int
    status: OrderStatus = OrderStatus.QUEUED
    current_step: int = 0
    started_at: Optional[int] = None
    finished_at: Optional[int] = None


# -- store file format --
#   recipe <name>
#   step <kind> <task_name> [arm] "<description>"

_STEP_RE = re.compile(
    r'^step\s+(worker|robot)\s+(\S+)(?:\s+(Left|Right))?\s+"(.*)"$')


def format_step(step: TaskStep) -> str:
    arm = f" {step.arm.value}" if step.arm is not None else ""
    return f'step {step.kind.value} {step.task_name}{arm} "{step.description}"'


def parse_step(line: str) -> TaskStep:
    match = _STEP_RE.match(line.strip())
    if not match:
        raise ValueError(f"bad step line: {line!r}")
    kind, name, arm, description = match.groups()
    return TaskStep(StepKind(kind), name,
                    ArmId.parse(arm) if arm else None, description)


def format_recipes(recipes: dict[str, Recipe]) -> str:
    lines = []
    for recipe in recipes.values():
        lines.append(f"recipe {recipe.name}")
        lines.extend(format_step(step) for step in recipe.steps)
    return "\n".join(lines) + ("\n" if lines else "")


def parse_recipes(text: str) -> dict[str, Recipe]:
    recipes: dict[str, Recipe] = {}
    name: Optional[str] = None
    steps: list[TaskStep] = []

    def flush():
        if name is not None:
            recipes[name] = Recipe(name, tuple(steps))

    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("recipe "):
            flush()
            name = line.split(None, 1)[1]
            steps = []
        else:
            steps.append(parse_step(line))
    flush()
    return recipes


class RecipeStore:
    """Durable recipe library with atomic replace-on-write."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.recipes: dict[str, Recipe] = {}
        if self.path.exists():
            self.recipes = parse_recipes(self.path.read_text(encoding="utf-8"))

    def _persist(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(format_recipes(self.recipes))
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self.path)

    def create(self, recipe: Recipe):
        if recipe.name in self.recipes:
            raise DuplicateName(recipe.name)
        self.recipes[recipe.name] = recipe
        self._persist()

    def update(self, recipe: Recipe):
        if recipe.name not in self.recipes:
            raise NotFound(recipe.name)
        self.recipes[recipe.name] = recipe
        self._persist()

    def delete(self, name: str):
        if name not in self.recipes:
            raise NotFound(name)
        del self.recipes[name]
        self._persist()

    def get(self, name: str) -> Recipe:
        if name not in self.recipes:
            raise NotFound(name)
        return self.recipes[name]

    def names(self) -> list[str]:
        return list(self.recipes)


class OrderLog:
    """Append-only order event log, flushed per event."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, order: ProductionOrder, event: str, timestamp: int):
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(f"{order.order_id} {order.recipe_name} {order.enqueued_at} "
                     f"{event} {timestamp}\n")
            fh.flush()
            os.fsync(fh.fileno())

    def lines(self) -> list[str]:
        if not self.path.exists():
            return []
        return self.path.read_text(encoding="utf-8").splitlines()


@dataclass(frozen=True)
class Dispatch:
    """A step the agent must send out (Agree for step 0, Accept after)."""

    order_id: str
    step_index: int
    step: TaskStep
    next_step: Optional[TaskStep]


class ProductCore:
    """Order queue and recipe-execution state machine."""

    def __init__(self, clock: Clock, store: RecipeStore, order_log: OrderLog):
        self.clock = clock
        self.store = store
        self.order_log = order_log
        self.orders: dict[str, ProductionOrder] = {}
        self.constraints: list[dict] = []
        self.blocked_text: Optional[str] = None
        self._held_propose: Optional[int] = None
        self._counter = 0
        self._lock = threading.Lock()

    # -- recipes --

    def _recipe_active(self, name: str) -> bool:
        return any(o.recipe_name == name and o.status in
                   (OrderStatus.RUNNING, OrderStatus.BLOCKED)
                   for o in self.orders.values())

    def create_recipe(self, recipe: Recipe):
        self.store.create(recipe)

    def update_recipe(self, recipe: Recipe):
        if self._recipe_active(recipe.name):
            raise RecipeInUse(recipe.name)
        self.store.update(recipe)

    def delete_recipe(self, name: str):
        if self._recipe_active(name):
            raise RecipeInUse(name)
        self.store.delete(name)

    # -- orders --

    def running_order(self) -> Optional[ProductionOrder]:
        for order in self.orders.values():
            if order.status in (OrderStatus.RUNNING, OrderStatus.BLOCKED):
                return order
        return None

    def enqueue(self, recipe_name: str) -> tuple[ProductionOrder, Optional[Dispatch]]:
        self.store.get(recipe_name)
        self._counter += 1
        order = ProductionOrder(f"o{self._counter}", recipe_name, self.clock.now_ms())
        self.orders[order.order_id] = order
        self.order_log.append(order, "enqueued", order.enqueued_at)
        return order, self._maybe_start()

    def _maybe_start(self) -> Optional[Dispatch]:
        if self.running_order() is not None:
            return None
        queued = [o for o in self.orders.values() if o.status is OrderStatus.QUEUED]
        if not queued:
            return None
        order = min(queued, key=lambda o: (o.enqueued_at, o.order_id))
        try:
            recipe = self.store.get(order.recipe_name)
        except NotFound:
            order.status = OrderStatus.FAILED
            order.finished_at = self.clock.now_ms()
            self.order_log.append(order, "failed recipe_missing", order.finished_at)
            return self._maybe_start()
        order.status = OrderStatus.RUNNING
        order.started_at = self.clock.now_ms()
        order.current_step = 0
        self.order_log.append(order, "started", order.started_at)
        return self._dispatch_for(order, recipe, 0)

    def _dispatch_for(self, order: ProductionOrder, recipe: Recipe, index: int) -> Dispatch:
        next_step = recipe.steps[index + 1] if index + 1 < len(recipe.steps) else None
        return Dispatch(order.order_id, index, recipe.steps[index], next_step)

    def on_propose(self, order_id: str, step_index: int) -> tuple[str, Optional[Dispatch], Optional[ProductionOrder]]:
        """Advance on a completed step.

        Returns (action, dispatch, completed_order); action is "accept",
        "reject" or "held".
        """
        order = self.running_order()
        if order is None or order.order_id != order_id:
            raise UnexpectedPropose(f"no running order matching {order_id}")
        if step_index != order.current_step:
            raise UnexpectedPropose(
                f"propose for step {step_index}, expected {order.current_step}")
        if order.status is OrderStatus.BLOCKED:
            self._held_propose = step_index
            return "held", None, None
        recipe = self.store.get(order.recipe_name)
        order.current_step += 1
        if order.current_step < len(recipe.steps):
            return "accept", self._dispatch_for(order, recipe, order.current_step), None
        order.status = OrderStatus.COMPLETED
        order.finished_at = self.clock.now_ms()
        self.order_log.append(order, "completed", order.finished_at)
        return "reject", self._maybe_start(), order

    def fail_running(self, reason: str, *, start_next: bool = True
                     ) -> tuple[Optional[ProductionOrder], Optional[Dispatch]]:
        order = self.running_order()
        if order is None:
            return None, None
        order.status = OrderStatus.FAILED
        order.finished_at = self.clock.now_ms()
        self.blocked_text = None
        self._held_propose = None
        self.order_log.append(order, f"failed {reason}", order.finished_at)
        return order, self._maybe_start() if start_next else None

    # -- constraints --

    def on_constraint(self, text: str) -> Optional[ProductionOrder]:
        self.constraints.append({"text": text, "stamp": self.clock.now_ms(),
                                 "resolved": False})
        order = self.running_order()
        if order is not None and order.status is OrderStatus.RUNNING:
            order.status = OrderStatus.BLOCKED
            self.blocked_text = text
            self.order_log.append(order, "blocked", self.clock.now_ms())
            return order
        return None

    def resolve(self) -> tuple[ProductionOrder, Optional[int]]:
        order = self.running_order()
        if order is None or order.status is not OrderStatus.BLOCKED:
            raise NotFound("no blocked order")
        order.status = OrderStatus.RUNNING
        self.blocked_text = None
        for constraint in self.constraints:
            constraint["resolved"] = True
        self.order_log.append(order, "resolved", self.clock.now_ms())
        held, self._held_propose = self._held_propose, None
        return order, held

    def begin_abort(self) -> ProductionOrder:
        order = self.running_order()
        if order is None:
            raise NotFound("no running order")
        return order

    def snapshot(self) -> dict:
        return {
            "recipes": {
                name: [{"kind": s.kind.value, "task_name": s.task_name,
                        "arm": s.arm.value if s.arm else None,
                        "description": s.description}
                       for s in recipe.steps]
                for name, recipe in self.store.recipes.items()
            },
            "orders": [
                {"order_id": o.order_id, "recipe": o.recipe_name,
                 "status": o.status.value, "current_step": o.current_step,
                 "enqueued_at": o.enqueued_at, "started_at": o.started_at,
                 "finished_at": o.finished_at}
                for o in sorted(self.orders.values(),
                                key=lambda o: (o.enqueued_at, o.order_id))
            ],
            "blocked_text": self.blocked_text,
            "constraints": list(self.constraints),
        }


def step_payload(dispatch: Dispatch) -> ContentPayload:
    step = dispatch.step
    if dispatch.next_step is None:
        text = "next none"
    else:
        nxt = dispatch.next_step
        arm = f" {nxt.arm.value}" if nxt.arm is not None else ""
        text = f"next {nxt.task_name} {nxt.kind.value}{arm}"
    return ContentPayload.task_details(
        step.task_name, kind=step.kind.value, step_index=dispatch.step_index,
        order_id=dispatch.order_id,
        arm=step.arm.value if step.arm is not None else "",
        description=step.description, text=text)


def conversation_for(order_id: str, step_index: int) -> str:
    return f"order/{order_id}/step/{step_index}"


@dataclass
class ProductHolon:
    holon: Holon
    core: ProductCore

    def stop(self):
        self.holon.stop()


def spawn_product_agent(bus: MessageBus, core: ProductCore, order_aid: AgentId,
                        platform: Optional[str] = None) -> ProductHolon:
    platform = platform or bus.platform

    def send_dispatch(holon: Holon, dispatch: Dispatch):
        performative = (Performative.AGREE if dispatch.step_index == 0
                        else Performative.ACCEPT_PROPOSAL)
        holon.send(performative, order_aid,
                   conversation_for(dispatch.order_id, dispatch.step_index),
                   step_payload(dispatch))

    def on_propose(holon: Holon, msg: AclMessage):
        order_id = msg.content.get("order_id")
        try:
            action, dispatch, completed = core.on_propose(order_id, msg.content.step_index)
        except UnexpectedPropose as exc:
            log.warning("unexpected propose: %s", exc)
            return
        if action == "accept":
            send_dispatch(holon, dispatch)
        elif action == "reject":
            holon.reply(msg, Performative.REJECT_PROPOSAL,
                        ContentPayload.status(f"order {completed.order_id} complete",
                                              order_id=completed.order_id))
            if dispatch is not None:
                send_dispatch(holon, dispatch)

    def on_failure(holon: Holon, msg: AclMessage):
        order, dispatch = core.fail_running(msg.content.get("text", "executor_failure"))
        if order is not None:
            log.warning("order %s failed: %s", order.order_id, msg.content.get("text"))
        if dispatch is not None:
            send_dispatch(holon, dispatch)

    def on_abort_ack(holon: Holon, msg: AclMessage):
        # order holon finished tearing down the aborted step; start the next
        dispatch = core._maybe_start()
        if dispatch is not None:
            send_dispatch(holon, dispatch)

    def on_constraint(holon: Holon, msg: AclMessage):
        order = core.on_constraint(msg.content.get("text"))
        if order is not None:
            log.info("order %s blocked by constraint", order.order_id)

    def on_request(holon: Holon, msg: AclMessage):
        text = msg.content.get("text")
        verb, _, rest = text.partition(" ")
        try:
            reply, chain = _run_command(holon, verb, rest)
        except WorkcellError as exc:
            holon.reply(msg, Performative.FAILURE,
                        ContentPayload.status(_error_token(exc)))
            return
        except ValueError as exc:
            holon.reply(msg, Performative.FAILURE,
                        ContentPayload.status(f"bad_command {exc}"))
            return
        holon.reply(msg, Performative.INFORM, reply)
        for action in chain:
            action()

    def _run_command(holon: Holon, verb: str, rest: str):
        if verb in ("recipe_create", "recipe_update"):
            name, _, steps_text = rest.partition(" ")
            steps = tuple(parse_step(part) for part in steps_text.split(";") if part.strip())
            recipe = Recipe(name, steps)
            if verb == "recipe_create":
                core.create_recipe(recipe)
            else:
                core.update_recipe(recipe)
            return ContentPayload.status("ok"), []
        if verb == "recipe_delete":
            core.delete_recipe(rest.strip())
            return ContentPayload.status("ok"), []
        if verb == "recipe_list":
            return ContentPayload.status(",".join(core.store.names())), []
        if verb == "enqueue":
            order, dispatch = core.enqueue(rest.strip())
            chain = []
            if dispatch is not None:
                chain.append(lambda: send_dispatch(holon, dispatch))
            return ContentPayload.status(order.order_id, order_id=order.order_id), chain
        if verb == "resolve":
            order, held = core.resolve()
            chain = []
            if held is not None:
                def continue_held():
                    action, dispatch, completed = core.on_propose(order.order_id, held)
                    if action == "accept" and dispatch is not None:
                        send_dispatch(holon, dispatch)
                    elif action == "reject":
                        holon.send(Performative.REJECT_PROPOSAL, order_aid,
                                   conversation_for(order.order_id, held),
                                   ContentPayload.status(
                                       f"order {order.order_id} complete",
                                       order_id=order.order_id))
                        if dispatch is not None:
                            send_dispatch(holon, dispatch)
                chain.append(continue_held)
            return ContentPayload.status("ok", order_id=order.order_id), chain
        if verb == "abort":
            order = core.begin_abort()
            core.fail_running("aborted", start_next=False)

            def notify():
                holon.send(Performative.FAILURE, order_aid,
                           conversation_for(order.order_id, order.current_step),
                           ContentPayload.status("aborted", order_id=order.order_id))
            return ContentPayload.status("ok", order_id=order.order_id), [notify]
        raise ValueError(f"unknown command {verb!r}")

    holon = spawn(bus, AgentId(PRODUCT_AGENT, platform), [
        BehaviourSpec("propose", MessageFilter(performative=Performative.PROPOSE), on_propose),
        BehaviourSpec("failure", MessageFilter(performative=Performative.FAILURE), on_failure),
        BehaviourSpec("abort-ack",
                      MessageFilter(performative=Performative.INFORM,
                                    conversation_prefix="order/"),
                      on_abort_ack),
        BehaviourSpec("constraints",
                      MessageFilter(performative=Performative.INFORM,
                                    conversation_prefix="constraint/"),
                      on_constraint),
        BehaviourSpec("commands", MessageFilter(performative=Performative.REQUEST), on_request),
    ], state=core, services=("recipe_store", "order_queue"))
    return ProductHolon(holon, core)


def _error_token(exc: WorkcellError) -> str:
    if isinstance(exc, DuplicateName):
        return "duplicate_name"
    if isinstance(exc, NotFound):
        return "not_found"
    if isinstance(exc, RecipeInUse):
        return "recipe_in_use"
    return "error"
