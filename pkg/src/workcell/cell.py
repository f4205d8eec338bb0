"""Workcell assembly: boots holons, bridges and transport in one call.

Two layouts exist. In-process mode runs every agent on one bus that
hosts both platform names. Two-platform mode runs a worker bus and a
robot bus connected by the TCP frame transport, which is the layout the
scenario harness uses to prove transport transparency. The robot body
and its bridge servers model the robot hardware, so killing the robot
platform tears down its agents and frame server but leaves the body
alive for the next boot, profiles included.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from workcell.clock import Clock, WallClock
from workcell.errors import WorkcellError
from workcell.messaging.acl import AgentId, ContentPayload
from workcell.messaging.bus import MessageBus, TraceCollector, wait_quiescent
from workcell.messaging.transport import FrameServer, PlatformLink, connect_platforms
from workcell.order import (
    ORDER_AGENT,
    TASK_MASTER,
    AgentDirectory,
    OrderHolons,
    TimingLog,
    spawn_order_agents,
)
from workcell.product import (
    PRODUCT_AGENT,
    OrderLog,
    ProductCore,
    ProductHolon,
    RecipeStore,
    spawn_product_agent,
)
from workcell.robot.agents import (
    ROBOT_DISPLAY,
    ROBOT_TASK,
    TASK_SLAVE,
    RobotAgents,
    spawn_robot_agents,
)
from workcell.robot.body import ProfileStore, RobotBody
from workcell.robot.bridge import DISPLAY_PORT, EXECUTE_PORT, RECORD_PORT, RobotBridge
from workcell.runtime import RequestClient
from workcell.worker import ToolMap, WorkerCore
from workcell.worker_agents import (
    WORKER_DISPLAY,
    WORKER_TASK,
    WorkerAgents,
    spawn_worker_agents,
)

log = logging.getLogger(__name__)

WORKER_PLATFORM = "worker_platform"
ROBOT_PLATFORM = "robot_platform"

DEFAULT_TOOLS_MAP = "screwdriver=bring_screws,20\n"


@dataclass
class WorkcellConfig:
    data_dir: Path
    realtime: bool = False
    two_platform: bool = False
    bridge_host: str = "127.0.0.1"
    record_port: int = RECORD_PORT
    execute_port: int = EXECUTE_PORT
    display_port: int = DISPLAY_PORT
    frames_host: str = "127.0.0.1"
    worker_frames_port: int = 0
    robot_frames_port: int = 0
    handshake_timeout_ms: int = 2000
    start_ms: int = 0

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)


class Workcell:
    """A booted cell and the handles needed to drive and observe it."""

    def __init__(self, config: WorkcellConfig):
        self.config = config
        self.clock: Clock = WallClock(config.start_ms) if config.realtime else Clock(config.start_ms)
        self.trace = TraceCollector()
        self.booted = False
        self.robot_alive = False

        self.product_aid = AgentId(PRODUCT_AGENT, WORKER_PLATFORM)
        self.order_aid = AgentId(ORDER_AGENT, WORKER_PLATFORM)
        self.master_aid = AgentId(TASK_MASTER, WORKER_PLATFORM)
        self.worker_aid = AgentId(WORKER_TASK, WORKER_PLATFORM)
        self.worker_display_aid = AgentId(WORKER_DISPLAY, WORKER_PLATFORM)
        self.robot_task_aid = AgentId(ROBOT_TASK, ROBOT_PLATFORM)
        self.robot_display_aid = AgentId(ROBOT_DISPLAY, ROBOT_PLATFORM)
        self.task_slave_aid = AgentId(TASK_SLAVE, ROBOT_PLATFORM)

    # -- lifecycle --

    def boot(self) -> "Workcell":
        cfg = self.config
        cfg.data_dir.mkdir(parents=True, exist_ok=True)

        if cfg.two_platform:
            self.worker_bus = MessageBus(WORKER_PLATFORM, self.clock, self.trace)
            self.robot_bus = MessageBus(ROBOT_PLATFORM, self.clock, self.trace)
            self.worker_frames = FrameServer(self.worker_bus, cfg.frames_host,
                                             cfg.worker_frames_port)
            self.robot_frames = FrameServer(self.robot_bus, cfg.frames_host,
                                            cfg.robot_frames_port)
            self._robot_frames_port = self.robot_frames.port
            connect_platforms(self.worker_bus, {
                ROBOT_PLATFORM: (self.robot_frames.host, self.robot_frames.port)})
            connect_platforms(self.robot_bus, {
                WORKER_PLATFORM: (self.worker_frames.host, self.worker_frames.port)})
        else:
            bus = MessageBus((WORKER_PLATFORM, ROBOT_PLATFORM), self.clock, self.trace)
            self.worker_bus = self.robot_bus = bus
            self.worker_frames = self.robot_frames = None

        self.profile_store = ProfileStore(cfg.data_dir / "profiles")
        self.body = RobotBody(self.clock, self.profile_store)
        self.bridge = RobotBridge(self.body, cfg.bridge_host,
                                  cfg.record_port, cfg.execute_port, cfg.display_port)

        tools_path = cfg.data_dir / "tools.map"
        if not tools_path.exists():
            tools_path.write_text(DEFAULT_TOOLS_MAP, encoding="utf-8")
        self.tools = ToolMap.load(tools_path)

        self.directory = AgentDirectory(
            product=self.product_aid, worker=self.worker_aid,
            worker_display=self.worker_display_aid, robot_task=self.robot_task_aid,
            robot_display=self.robot_display_aid, task_slave=self.task_slave_aid)

        self.recipe_store = RecipeStore(cfg.data_dir / "recipes.store")
        self.order_log = OrderLog(cfg.data_dir / "orders.log")
        self.product_core = ProductCore(self.clock, self.recipe_store, self.order_log)
        self.product = spawn_product_agent(self.worker_bus, self.product_core,
                                           self.order_aid, WORKER_PLATFORM)

        self.timing_log = TimingLog(cfg.data_dir / "timing.log")
        self.order = spawn_order_agents(
            self.worker_bus, self.directory, self.clock, self.timing_log,
            handshake_timeout_ms=cfg.handshake_timeout_ms, platform=WORKER_PLATFORM)

        self.worker_core = WorkerCore(self.clock, self.tools)
        self.worker = spawn_worker_agents(self.worker_bus, self.worker_core,
                                          self.order_aid, self.product_aid,
                                          WORKER_PLATFORM)

        self.robot: Optional[RobotAgents] = spawn_robot_agents(
            self.robot_bus, self.body, self.bridge, ROBOT_PLATFORM)
        self.robot_alive = True

        self.client = RequestClient(self.worker_bus, "operator")
        self.booted = True
        return self

    def shutdown(self):
        if not self.booted:
            return
        for part in (self.worker, self.order, self.product):
            try:
                part.stop()
            except WorkcellError:
                pass
        if self.robot is not None:
            self.robot.stop()
        self.client.close()
        self.bridge.close()
        if self.worker_frames is not None:
            self.worker_frames.close()
        if self.robot_frames is not None:
            self.robot_frames.close()
        self.booted = False

    def kill_robot_platform(self):
        """Simulate the robot platform dying mid-run."""
        if not self.robot_alive:
            return
        if self.robot_frames is not None:
            self.robot_frames.close()
        if self.robot is not None:
            self.robot.stop()
            self.robot = None
        self.robot_alive = False

    def boot_robot_platform(self):
        """Bring the robot platform back; profiles persisted on disk."""
        if self.robot_alive:
            return
        if self.config.two_platform:
            self.robot_bus = MessageBus(ROBOT_PLATFORM, self.clock, self.trace)
            self.robot_frames = FrameServer(self.robot_bus, self.config.frames_host,
                                            self._robot_frames_port)
            connect_platforms(self.robot_bus, {
                WORKER_PLATFORM: (self.worker_frames.host, self.worker_frames.port)})
        self.robot = spawn_robot_agents(self.robot_bus, self.body, self.bridge,
                                        ROBOT_PLATFORM)
        self.robot_alive = True

    # -- driving --

    def request(self, to: AgentId, text: str, timeout_ms: int = 5000):
        return self.client.request(to, ContentPayload.status(text), timeout_ms=timeout_ms)

    def worker_request(self, text: str, timeout_ms: int = 5000):
        return self.request(self.worker_aid, text, timeout_ms)

    def product_request(self, text: str, timeout_ms: int = 5000):
        return self.request(self.product_aid, text, timeout_ms)

    def master_request(self, text: str, timeout_ms: int = 10000):
        return self.request(self.master_aid, text, timeout_ms)

    # -- observing --

    def buses(self) -> list[MessageBus]:
        if self.worker_bus is self.robot_bus:
            return [self.worker_bus]
        return [self.worker_bus, self.robot_bus]

    def wait_quiescent(self, timeout_s: float = 10.0) -> bool:
        return wait_quiescent(self.buses(), self.trace, timeout_s)

    def snapshot(self) -> dict:
        product = self.product_core.snapshot()
        master = self.order.master.state
        session = master.session or master.last
        return {
            "time_ms": self.clock.now_ms(),
            "worker": {**self.worker_core.snapshot(),
                       "display": self.worker.display_state.text},
            "robot": {**self.body.snapshot(), "alive": self.robot_alive},
            "recipes": product["recipes"],
            "orders": product["orders"],
            "blocked_text": product["blocked_text"],
            "constraints": product["constraints"],
            "view": self.order.state.current_next_view(),
            "worker_status": self.order.state.worker_status,
            "teaching": {
                "active": self.order.gate.active,
                "session_id": session.session_id if session else None,
                "task_name": session.task_name if session else None,
                "arm": session.arm.value if session else None,
                "phase": session.phase.value if session and session.phase else None,
            },
        }
