"""Feed server and client over a reliable byte stream (TCP or a socketpair)."""

from __future__ import annotations

import logging
import socket
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from ..clock import WallClock
from ..codec import EncodedFrame, Encoder
from ..frames import YuvFrame
from . import protocol as p
from .activation import DenialReason, KeyVerdict, authorize

log = logging.getLogger(__name__)

DEFAULT_PRODUCT = "SIM-PHANTOM-3P"
DEFAULT_FIRMWARE = "1.0.0"


class ActivationDenied(Exception):
    pass


class HandshakeTimeout(Exception):
    pass


def parse_address(addr) -> tuple[str, int]:
    if isinstance(addr, tuple):
        return addr[0], int(addr[1])
    host, sep, port = str(addr).rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"expected HOST:PORT, got {addr!r}")
    return host or "127.0.0.1", int(port)


@dataclass
class ServerConfig:
    fps: float = 30.0
    keyframe_interval: int = 30
    allowlist: frozenset[str] | None = None
    product_name: str = DEFAULT_PRODUCT
    firmware: str = DEFAULT_FIRMWARE
    handshake_timeout: float = 5.0

    def __post_init__(self):
        if not self.fps > 0:
            raise ValueError("fps must be positive")
        if self.keyframe_interval < 1:
            raise ValueError("keyframe_interval must be >= 1")


@dataclass
class SessionSummary:
    peer: str = ""
    accepted: bool = False
    denial: DenialReason | None = None
    frames_sent: int = 0
    keyframes: list[int] = field(default_factory=list)
    send_times_micros: list[int] = field(default_factory=list)
    bytes_written: int = 0
    completed: bool = False
    error: str | None = None


def frame_schedule(index: int, fps: float) -> int:
    """Send offset of frame ``index`` in integer microseconds (floored)."""
    if float(fps).is_integer():
        return index * 1_000_000 // int(fps)
    return int(index * 1_000_000 / fps)


def serve_session(conn: socket.socket, frames: Iterable[YuvFrame], config: ServerConfig,
                  clock=None) -> SessionSummary:
    """Run one client session on an accepted connection and close it.

    Transport failures are recorded in the summary, never raised.
    """
    clock = clock or WallClock()
    summary = SessionSummary()
    try:
        summary.peer = str(conn.getpeername())
    except OSError:
        pass
    rfile = conn.makefile("rb")

    def send(msg: p.WireMessage) -> None:
        data = p.encode_message(msg)
        conn.sendall(data)
        summary.bytes_written += len(data)

    try:
        conn.settimeout(config.handshake_timeout)
        msg = p.decode_message(rfile)
        if msg.kind is not p.MessageKind.HELLO:
            raise p.ProtocolError(f"expected HELLO, got {msg.kind.name}")
        version, key = p.parse_hello(msg)
        if version != p.PROTOCOL_VERSION:
            verdict = KeyVerdict(False, DenialReason.VERSION)
        else:
            verdict = authorize(key, config.allowlist)
        if not verdict:
            summary.denial = verdict.reason
            send(p.HelloAck(p.AckStatus.DENIED, config.product_name, config.firmware).to_message())
            log.info("denied %s: %s", summary.peer, verdict.reason.value)
            return summary
        summary.accepted = True
        send(p.HelloAck(p.AckStatus.ACCEPTED, config.product_name, config.firmware).to_message())
        conn.settimeout(None)

        encoder = Encoder(config.keyframe_interval)
        start = clock.now_micros()
        for index, frame in enumerate(frames):
            offset = frame_schedule(index, config.fps)
            clock.sleep_until(start + offset)
            summary.send_times_micros.append(clock.now_micros() - start)
            stamped = YuvFrame(frame.resolution, frame.layout, frame.y, frame.chroma,
                               seq=index, pts_micros=offset)
            enc = encoder.encode(stamped)
            if enc.keyframe:
                summary.keyframes.append(index)
            send(p.frame_message(enc))
            summary.frames_sent += 1
        send(p.BYE)
        summary.completed = True
    except (OSError, p.ProtocolError) as exc:
        summary.error = f"{type(exc).__name__}: {exc}"
        log.warning("session %s ended: %s", summary.peer, summary.error)
    finally:
        rfile.close()
        try:
            conn.close()
        except OSError:
            pass
    return summary


class FeedServer:
    """Threaded accept loop; each connection gets a fresh frame iterable from ``source``."""

    def __init__(self, address, source: Callable[[], Iterable[YuvFrame]],
                 config: ServerConfig | None = None, max_sessions: int | None = None,
                 clock_factory=WallClock):
        self.config = config or ServerConfig()
        self.source = source
        self.max_sessions = max_sessions
        self.clock_factory = clock_factory
        self.summaries: list[SessionSummary] = []
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._sock = socket.create_server(parse_address(address))
        self._sock.settimeout(0.2)

    @property
    def address(self) -> tuple[str, int]:
        return self._sock.getsockname()[:2]

    def _run(self, conn: socket.socket) -> None:
        summary = serve_session(conn, self.source(), self.config, self.clock_factory())
        with self._lock:
            self.summaries.append(summary)

    def serve_forever(self) -> None:
        started = 0
        try:
            while not self._stop.is_set():
                if self.max_sessions is not None and started >= self.max_sessions:
                    break
                try:
                    conn, _ = self._sock.accept()
                except socket.timeout:
                    continue
                except OSError:
                    if self._stop.is_set():
                        break
                    raise
                started += 1
                t = threading.Thread(target=self._run, args=(conn,), daemon=True)
                t.start()
                self._threads.append(t)
        finally:
            for t in self._threads:
                t.join()
            self._sock.close()

    def shutdown(self) -> None:
        self._stop.set()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.shutdown()
        self._sock.close()


class FeedConnection:
    """Client side of an accepted session: UAV info plus an ordered frame stream.

    Iterating yields :class:`EncodedFrame` values until BYE; CRC failures
    propagate as :class:`~skyfeed.wire.protocol.CrcMismatchError`.
    """

    def __init__(self, sock: socket.socket, rfile, ack: p.HelloAck):
        self._sock = sock
        self._rfile = rfile
        self.product_name = ack.product_name
        self.firmware = ack.firmware
        self.finished = False
        self._last_seq: int | None = None

    def __iter__(self) -> Iterator[EncodedFrame]:
        while not self.finished:
            msg = p.decode_message(self._rfile)
            if msg.kind is p.MessageKind.BYE:
                self.finished = True
                return
            if msg.kind is not p.MessageKind.FRAME:
                raise p.ProtocolError(f"unexpected {msg.kind.name} while streaming")
            enc = p.parse_frame(msg)
            if self._last_seq is not None and enc.seq <= self._last_seq:
                raise p.ProtocolError(f"frame seq {enc.seq} after {self._last_seq}")
            self._last_seq = enc.seq
            yield enc

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._rfile.close()
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def handshake(sock: socket.socket, key: str, timeout: float = 5.0) -> FeedConnection:
    """Send HELLO on a connected socket and wait for an accepting HELLO_ACK."""
    sock.settimeout(timeout)
    # one buffered reader for the connection's lifetime; it may read ahead past the ACK
    rfile = sock.makefile("rb")
    try:
        sock.sendall(p.encode_message(p.hello(key)))
        msg = p.decode_message(rfile)
        if msg.kind is not p.MessageKind.HELLO_ACK:
            raise p.ProtocolError(f"expected HELLO_ACK, got {msg.kind.name}")
        ack = p.HelloAck.from_message(msg)
        if ack.status is not p.AckStatus.ACCEPTED:
            raise ActivationDenied("activation key denied by feed server")
    except socket.timeout:
        rfile.close()
        sock.close()
        raise HandshakeTimeout(f"no HELLO_ACK within {timeout}s") from None
    except BaseException:
        rfile.close()
        sock.close()
        raise
    sock.settimeout(None)
    return FeedConnection(sock, rfile, ack)


def connect_session(address, key: str, timeout: float = 5.0) -> FeedConnection:
    sock = socket.create_connection(parse_address(address), timeout=timeout)
    return handshake(sock, key, timeout)
