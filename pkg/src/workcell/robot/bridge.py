"""Line-protocol bridge between robot agents and the simulated body.

Three TCP servers mirror the record / execute / display command paths.
Each client connection carries exactly one newline-terminated command
and receives one newline-terminated reply, "OK" or "ERR <reason>", after
which the server goes back to waiting for the next client. Commands:

    record  port 10002   <task>,<arm>
    execute port 10005   <task>
    display port 10011   <task>          (empty payload clears)
"""

from __future__ import annotations

import logging
import socket
import threading
from typing import Callable

from workcell.errors import (
    ArmBusy,
    DuplicateTaskName,
    EmptyRecording,
    JointLimit,
    MalformedCommand,
    UnknownTask,
)
from workcell.robot.body import ArmId, RobotBody

log = logging.getLogger(__name__)

RECORD_PORT = 10002
EXECUTE_PORT = 10005
DISPLAY_PORT = 10011

_MAX_LINE = 4096

_ERR_REASONS = {
    MalformedCommand: "malformed",
    DuplicateTaskName: "duplicate_task",
    ArmBusy: "arm_busy",
    UnknownTask: "unknown_task",
    JointLimit: "joint_limit",
    EmptyRecording: "empty_recording",
}


def _reason(exc: Exception) -> str:
    for cls, reason in _ERR_REASONS.items():
        if isinstance(exc, cls):
            return reason
    return "internal"


class BridgeServer:
    """One endpoint: accepts a single connection at a time."""

    def __init__(self, name: str, handler: Callable[[str], None],
                 host: str = "127.0.0.1", port: int = 0):
        self.name = name
        self._handler = handler
        self._listener = socket.create_server((host, port))
        self.host, self.port = self._listener.getsockname()[:2]
        self._closed = False
        self._thread = threading.Thread(target=self._serve, name=f"bridge-{name}", daemon=True)
        self._thread.start()

    def _serve(self):
        while not self._closed:
            try:
                conn, _ = self._listener.accept()
            except OSError:
                return
            with conn:
                try:
                    line = self._read_line(conn)
                except OSError:
                    continue
                if line is None:
                    continue
                try:
                    self._handler(line)
                    reply = "OK"
                except Exception as exc:  # every failure maps to one ERR line
                    reply = f"ERR {_reason(exc)}"
                    if _reason(exc) == "internal":
                        log.exception("%s endpoint failed on %r", self.name, line)
                try:
                    conn.sendall((reply + "\n").encode("utf-8"))
                except OSError:
                    pass

    def _read_line(self, conn: socket.socket) -> str | None:
        buf = b""
        while b"\n" not in buf:
            if len(buf) > _MAX_LINE:
                return buf.decode("utf-8", "replace")
            chunk = conn.recv(1024)
            if not chunk:
                return None
            buf += chunk
        return buf.split(b"\n", 1)[0].rstrip(b"\r").decode("utf-8")

    def close(self):
        self._closed = True
        try:
            self._listener.close()
        except OSError:
            pass


def bridge_request(port: int, payload: str, host: str = "127.0.0.1",
                   timeout_s: float = 30.0) -> str:
    """Send one command line, return the reply line, disconnect."""
    with socket.create_connection((host, port), timeout=timeout_s) as sock:
        sock.sendall((payload + "\n").encode("utf-8"))
        buf = b""
        while b"\n" not in buf:
            chunk = sock.recv(1024)
            if not chunk:
                break
            buf += chunk
    return buf.split(b"\n", 1)[0].decode("utf-8")


class RobotBridge:
    """The three endpoints wired to one robot body."""

    def __init__(self, body: RobotBody, host: str = "127.0.0.1",
                 record_port: int = RECORD_PORT, execute_port: int = EXECUTE_PORT,
                 display_port: int = DISPLAY_PORT):
        self.body = body
        self.record = BridgeServer("record", self._handle_record, host, record_port)
        self.execute = BridgeServer("execute", self._handle_execute, host, execute_port)
        self.display = BridgeServer("display", self._handle_display, host, display_port)

    def _handle_record(self, payload: str):
        name, sep, arm_token = payload.partition(",")
        if not sep or not name:
            raise MalformedCommand(payload)
        self.body.validate_start(name, ArmId.parse(arm_token))

    def _handle_execute(self, payload: str):
        if not payload:
            raise MalformedCommand("empty task name")
        self.body.execute_task(payload)

    def _handle_display(self, payload: str):
        self.body.display(payload)

    @property
    def ports(self) -> dict[str, int]:
        return {"record": self.record.port, "execute": self.execute.port,
                "display": self.display.port}

    def close(self):
        for server in (self.record, self.execute, self.display):
            server.close()
