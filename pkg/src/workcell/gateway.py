"""Operator gateway: HTTP façade over the bus plus a push event stream.

Every mutating endpoint forwards a Request to the owning holon and maps
its reply; reads come from a quiescent-turn snapshot. The gateway keeps
no state of its own, so restarting it loses nothing. The /events stream
sends one JSON event per line-delimited SSE message: a full snapshot on
subscribe, then every sniffer record in global order, with fresh
snapshots whenever the cell settles into a new state.
"""

from __future__ import annotations

import json
import logging
from typing import Any, Iterator, Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import StreamingResponse

from workcell.cell import Workcell
from workcell.errors import ReceiveTimeout, WorkcellError
from workcell.gesture import HandObs, HandFrame, HandType, SwipeObs, format_frame
from workcell.messaging.acl import AclMessage, Performative
from workcell.product import StepKind, TaskStep, format_step
from workcell.robot.body import ArmId, Gripper

log = logging.getLogger(__name__)

_STATUS_BY_TOKEN = {
    "already_registered": 409,
    "worker_busy": 409,
    "worker_unavailable": 409,
    "duplicate_name": 409,
    "recipe_in_use": 409,
    "duplicate_task": 409,
    "arm_busy": 409,
    "teaching_active": 409,
    "refused": 409,
    "not_registered": 404,
    "not_found": 404,
    "unknown_task": 404,
    "timeout": 504,
}


def _reply_or_raise(reply: AclMessage) -> dict:
    if reply.performative is Performative.FAILURE:
        text = reply.content.get("text")
        token = text.split()[0] if text else "error"
        raise HTTPException(_STATUS_BY_TOKEN.get(token, 400), detail=text or "error")
    return {"result": reply.content.get("text"), **reply.content.entries}


def _steps_from_body(steps: list[dict]) -> str:
    parsed = []
    for raw in steps:
        arm = raw.get("arm")
        parsed.append(TaskStep(StepKind(raw["kind"]), raw["task_name"],
                               ArmId.parse(arm) if arm else None,
                               raw.get("description", "")))
    return ";".join(format_step(step) for step in parsed)


def create_app(cell: Workcell, static_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="workcell gateway")

    def call(fn, *args) -> dict:
        try:
            return _reply_or_raise(fn(*args))
        except ReceiveTimeout as exc:
            raise HTTPException(504, detail=str(exc)) from exc

    # -- snapshot / views --

    @app.get("/snapshot")
    def snapshot():
        cell.wait_quiescent(2.0)
        return cell.snapshot()

    @app.get("/recipes")
    def recipes():
        return {"recipes": cell.snapshot()["recipes"]}

    @app.get("/orders")
    def orders():
        return {"orders": cell.snapshot()["orders"]}

    @app.get("/view")
    def view():
        return cell.order.state.current_next_view()

    # -- recipes --

    @app.post("/recipes")
    async def create_recipe(request: Request):
        body = await request.json()
        spec = _steps_from_body(body["steps"])
        return call(cell.product_request, f"recipe_create {body['name']} {spec}")

    @app.put("/recipes/{name}")
    async def update_recipe(name: str, request: Request):
        body = await request.json()
        spec = _steps_from_body(body["steps"])
        return call(cell.product_request, f"recipe_update {name} {spec}")

    @app.delete("/recipes/{name}")
    def delete_recipe(name: str):
        return call(cell.product_request, f"recipe_delete {name}")

    # -- orders --

    @app.post("/orders")
    async def enqueue_order(request: Request):
        body = await request.json()
        return call(cell.product_request, f"enqueue {body['recipe']}")

    @app.post("/orders/resolve")
    def resolve_order():
        return call(cell.product_request, "resolve")

    @app.post("/orders/abort")
    def abort_order():
        return call(cell.product_request, "abort")

    # -- teaching --

    @app.post("/teaching")
    async def teach(request: Request):
        body = await request.json()
        return call(cell.master_request, f"teach {body['task']} {body['arm']}")

    @app.post("/teaching/init")
    async def teach_init(request: Request):
        body = await request.json()
        return call(cell.master_request, f"teach_init {body['task']} {body['arm']}")

    @app.post("/teaching/guide/{arm}")
    async def teach_guide(arm: str, request: Request):
        body = await request.json()
        points = [(int(p["t_offset"]), [float(j) for j in p["joints"]],
                   Gripper(p.get("gripper", "Open"))) for p in body["points"]]
        cell.body.queue_guided_motion(ArmId.parse(arm), points)
        return {"result": "ok", "queued": len(points)}

    @app.post("/teaching/jog")
    async def teach_jog(request: Request):
        body = await request.json()
        robot = cell.robot
        session = robot.slave_state.session if robot is not None else None
        if session is None:
            raise HTTPException(409, detail="no recording session")
        try:
            waypoint = cell.body.jog(
                session, [float(j) for j in body["joints"]],
                Gripper(body.get("gripper", "Open")),
                at_offset=body.get("t_offset"))
        except WorkcellError as exc:
            raise HTTPException(409, detail=str(exc)) from exc
        return {"result": "ok", "t_offset": waypoint.t_offset}

    @app.post("/teaching/{phase}")
    def teach_phase(phase: str):
        if phase not in ("start", "stop", "save", "abort", "status"):
            raise HTTPException(404, detail=f"unknown phase {phase}")
        return call(cell.master_request, f"teach_{phase}")

    # -- worker --

    @app.post("/worker/register")
    async def register_worker(request: Request):
        body = await request.json()
        caps = ",".join(body.get("capabilities", []))
        text = f"register {body['worker_id']} {body['location']}"
        if caps:
            text += f" {caps}"
        return call(cell.worker_request, text)

    @app.post("/worker/deregister")
    def deregister_worker():
        return call(cell.worker_request, "deregister")

    @app.post("/worker/availability")
    async def set_availability(request: Request):
        body = await request.json()
        return call(cell.worker_request,
                    f"availability {'on' if body.get('available') else 'off'}")

    @app.post("/worker/constraint")
    async def submit_constraint(request: Request):
        body = await request.json()
        return call(cell.worker_request, f"constraint {body['text']}")

    # -- gesture / frame injection --

    @app.post("/gestures")
    async def inject_gesture(request: Request):
        body = await request.json()
        text = f"gesture {body['gesture']}"
        if body.get("tool"):
            text += f" {body['tool']}"
        return call(cell.worker_request, text)

    @app.post("/frames")
    async def inject_frame(request: Request):
        body = await request.json()
        if "line" in body:
            line = body["line"]
        else:
            frame = HandFrame(
                int(body["frame_id"]), float(body.get("t", 0.0)),
                hands=tuple(HandObs(HandType(h["hand_type"]), float(h["pitch_deg"]),
                                    tuple(float(v) for v in h["arm_dir"]))
                            for h in body.get("hands", [])),
                tool_count=int(body.get("tool_count", 0)),
                swipes=tuple(SwipeObs(float(s["dir_x"]), float(s["speed"]))
                             for s in body.get("swipes", [])))
            line = format_frame(frame)
        return call(cell.worker_request, f"frame {line}")

    # -- push stream --

    @app.get("/events")
    def events() -> StreamingResponse:
        return StreamingResponse(_event_stream(cell), media_type="text/event-stream")

    if static_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def _record_event(record) -> dict:
    msg = record.message
    return {
        "type": "message",
        "global_seq": record.global_seq,
        "performative": msg.performative.value,
        "sender": str(msg.sender),
        "receivers": [str(r) for r in msg.receivers],
        "conversation_id": msg.conversation_id,
        "content_kind": msg.content.kind.value,
        "content": dict(msg.content.entries),
        "delivered_at": record.delivered_at,
    }


def _sse(payload: dict) -> str:
    return f"data: {json.dumps(payload)}\n\n"


def _event_stream(cell: Workcell) -> Iterator[str]:
    tap = cell.trace.subscribe()
    last_snapshot = cell.snapshot()
    yield _sse({"type": "snapshot", "data": last_snapshot})
    while True:
        try:
            record = tap.get(timeout=0.5)
        except ReceiveTimeout:
            snapshot = cell.snapshot()
            if snapshot != last_snapshot:
                last_snapshot = snapshot
                yield _sse({"type": "snapshot", "data": snapshot})
            continue
        yield _sse(_record_event(record))
