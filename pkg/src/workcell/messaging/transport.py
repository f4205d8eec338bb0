"""TCP transport between platforms.

Frames are 4-byte big-endian length prefixes followed by UTF-8 text, one
serialized message per frame. The receiving platform answers each
message frame with a short status frame, "OK" once the message is in the
receivers' mailboxes or "ERR <reason>" otherwise, so senders learn about
unknown receivers synchronously, like an in-process send.
"""

from __future__ import annotations

import logging
import socket
import struct
import threading
from typing import Optional

from workcell.errors import TransportDown, UnknownReceiver, WireFormatError
from workcell.messaging.acl import AclMessage, decode_message, encode_message
from workcell.messaging.bus import MessageBus

log = logging.getLogger(__name__)

_LEN = struct.Struct(">I")
MAX_FRAME = 1 << 20


def send_frame(sock: socket.socket, text: str):
    data = text.encode("utf-8")
    sock.sendall(_LEN.pack(len(data)) + data)


def recv_frame(sock: socket.socket) -> Optional[str]:
    """Read one frame; None on clean EOF."""
    header = _recv_exact(sock, _LEN.size)
    if header is None:
        return None
    (length,) = _LEN.unpack(header)
    if length > MAX_FRAME:
        raise WireFormatError(f"frame too large: {length}")
    body = _recv_exact(sock, length)
    if body is None:
        raise WireFormatError("connection closed mid-frame")
    return body.decode("utf-8")


def _recv_exact(sock: socket.socket, count: int) -> Optional[bytes]:
    chunks = b""
    while len(chunks) < count:
        chunk = sock.recv(count - len(chunks))
        if not chunk:
            return None if not chunks else None
        chunks += chunk
    return chunks


class FrameServer:
    """Accepts message frames for one platform's bus."""

    def __init__(self, bus: MessageBus, host: str = "127.0.0.1", port: int = 0):
        self.bus = bus
        self._listener = socket.create_server((host, port))
        self.host, self.port = self._listener.getsockname()[:2]
        self._closed = False
        self._conns: list[socket.socket] = []
        self._lock = threading.Lock()
        self._thread = threading.Thread(
            target=self._accept_loop, name=f"frames-{bus.platform}", daemon=True)
        self._thread.start()

    def _accept_loop(self):
        while not self._closed:
            try:
                conn, _ = self._listener.accept()
            except OSError:
                return
            with self._lock:
                self._conns.append(conn)
            threading.Thread(target=self._serve, args=(conn,), daemon=True).start()

    def _serve(self, conn: socket.socket):
        with conn:
            while not self._closed:
                try:
                    text = recv_frame(conn)
                except (OSError, WireFormatError) as exc:
                    log.debug("inbound connection dropped: %s", exc)
                    return
                if text is None:
                    return
                try:
                    msg = decode_message(text)
                    self.bus.deliver_inbound(msg)
                    reply = "OK"
                except UnknownReceiver as exc:
                    reply = f"ERR unknown_receiver {exc}"
                except WireFormatError as exc:
                    reply = f"ERR bad_frame {exc}"
                try:
                    send_frame(conn, reply)
                except OSError:
                    return

    def close(self):
        self._closed = True
        try:
            self._listener.close()
        except OSError:
            pass
        with self._lock:
            for conn in self._conns:
                try:
                    conn.shutdown(socket.SHUT_RDWR)
                except OSError:
                    pass
                try:
                    conn.close()
                except OSError:
                    pass
            self._conns.clear()


class PlatformLink:
    """Client side of one peer platform; reconnects once per send."""

    def __init__(self, platform: str, host: str, port: int, timeout_s: float = 5.0):
        self.platform = platform
        self.host = host
        self.port = port
        self.timeout_s = timeout_s
        self._sock: Optional[socket.socket] = None
        self._lock = threading.Lock()

    def _connect(self) -> socket.socket:
        sock = socket.create_connection((self.host, self.port), timeout=self.timeout_s)
        return sock

    def deliver(self, msg: AclMessage):
        text = encode_message(msg)
        with self._lock:
            for attempt in (1, 2):
                try:
                    if self._sock is None:
                        self._sock = self._connect()
                    send_frame(self._sock, text)
                    reply = recv_frame(self._sock)
                    if reply is None:
                        raise OSError("peer closed connection")
                    break
                except OSError as exc:
                    self._drop()
                    if attempt == 2:
                        raise TransportDown(
                            f"platform {self.platform} unreachable: {exc}") from exc
        if reply != "OK":
            raise UnknownReceiver(reply.removeprefix("ERR ").strip())

    def _drop(self):
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass
            self._sock = None

    def close(self):
        with self._lock:
            self._drop()


def connect_platforms(bus: MessageBus, peers: dict[str, tuple[str, int]]) -> dict[str, PlatformLink]:
    """Wire a bus's remote router to TCP links for the given peers."""
    links = {name: PlatformLink(name, host, port) for name, (host, port) in peers.items()}

    def route(platform: str, msg: AclMessage):
        link = links.get(platform)
        if link is None:
            raise UnknownReceiver(f"no route to platform {platform}")
        link.deliver(msg)

    bus.set_remote_router(route)
    return links
