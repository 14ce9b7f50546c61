"""Binary wire protocol for attaching an external epsilon predictor.

The client opens a byte stream (TCP or a child process's stdio) and sends
``b"SCEP"`` plus a u16 version; the server answers with the same eight
bytes carrying its own version. Each request is::

    u8 type (1 = predict) | u32 t | u32 H | u32 W | u32 C | H*W*C float32

and the reply repeats the header with type 2 and the same payload layout.
A server may instead answer with type 3 followed by u32 length and a UTF-8
message. All integers and floats are little-endian.
"""

from __future__ import annotations

import argparse
import os
import selectors
import shlex
import socket
import struct
import subprocess
import sys
import threading

import numpy as np

from .errors import ScoreError

MAGIC = b"SCEP"
VERSION = 1
MSG_PREDICT = 1
MSG_EPSILON = 2
MSG_ERROR = 3
DEFAULT_TIMEOUT = 30.0

HANDSHAKE = struct.Struct("<4sH")
HEADER = struct.Struct("<BIIII")
_DIMS = struct.Struct("<IIII")
_LEN = struct.Struct("<I")


class ProtocolError(ScoreError):
    """Base class for external-predictor failures."""

    timestep = None


class FrameTimeout(ProtocolError):
    pass


class TruncatedFrame(ProtocolError):
    pass


class MalformedFrame(ProtocolError):
    pass


class VersionMismatch(ProtocolError):
    pass


class ShapeMismatch(ProtocolError):
    def __init__(self, expected, actual):
        super().__init__(f"expected (H, W, C) = {tuple(expected)}, got {tuple(actual)}")
        self.expected = tuple(expected)
        self.actual = tuple(actual)


class RemoteError(ProtocolError):
    """The server reported that it could not produce a prediction."""


def encode_frame(msg_type: int, t: int, x) -> bytes:
    x = np.asarray(x)
    h, w, c = x.shape
    return HEADER.pack(msg_type, t, h, w, c) + np.ascontiguousarray(x, dtype="<f4").tobytes()


class _SocketStream:
    def __init__(self, sock: socket.socket, timeout: float):
        self.sock = sock
        sock.settimeout(timeout)

    def send(self, data: bytes):
        try:
            self.sock.sendall(data)
        except socket.timeout as exc:
            raise FrameTimeout("timed out sending frame") from exc
        except OSError as exc:
            raise TruncatedFrame(f"connection lost while sending: {exc}") from exc

    def recv_exact(self, n: int) -> bytes:
        buf = bytearray()
        while len(buf) < n:
            try:
                chunk = self.sock.recv(n - len(buf))
            except socket.timeout as exc:
                raise FrameTimeout(f"timed out after {len(buf)} of {n} bytes") from exc
            except OSError as exc:
                raise TruncatedFrame(f"connection lost after {len(buf)} of {n} bytes") from exc
            if not chunk:
                raise TruncatedFrame(f"stream closed after {len(buf)} of {n} bytes")
            buf += chunk
        return bytes(buf)

    def close(self):
        self.sock.close()


class _ProcessStream:
    def __init__(self, argv, timeout: float):
        self.proc = subprocess.Popen(argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE)
        self.timeout = timeout
        self._sel = selectors.DefaultSelector()
        self._sel.register(self.proc.stdout, selectors.EVENT_READ)

    def send(self, data: bytes):
        try:
            self.proc.stdin.write(data)
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TruncatedFrame(f"predictor process closed its input: {exc}") from exc

    def recv_exact(self, n: int) -> bytes:
        fd = self.proc.stdout.fileno()
        buf = bytearray()
        while len(buf) < n:
            if not self._sel.select(self.timeout):
                raise FrameTimeout(f"timed out after {len(buf)} of {n} bytes")
            chunk = os.read(fd, n - len(buf))
            if not chunk:
                raise TruncatedFrame(f"stream closed after {len(buf)} of {n} bytes")
            buf += chunk
        return bytes(buf)

    def close(self):
        self._sel.close()
        for f in (self.proc.stdin, self.proc.stdout):
            try:
                f.close()
            except OSError:
                pass
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()


def open_stream(endpoint: str, timeout: float = DEFAULT_TIMEOUT):
    """Open ``tcp://host:port`` or ``exec:<command line>``."""
    if endpoint.startswith("tcp://"):
        host, _, port = endpoint[len("tcp://"):].rpartition(":")
        try:
            sock = socket.create_connection((host, int(port)), timeout=timeout)
        except (OSError, ValueError) as exc:
            raise ProtocolError(f"cannot connect to {endpoint}: {exc}") from exc
        return _SocketStream(sock, timeout)
    if endpoint.startswith("exec:"):
        argv = shlex.split(endpoint[len("exec:"):])
        if not argv:
            raise ProtocolError("exec endpoint names no command")
        return _ProcessStream(argv, timeout)
    raise ProtocolError(f"unsupported endpoint {endpoint!r}; use tcp://host:port or exec:cmd")


class ExternalPredictor:
    """Epsilon predictor backed by a remote process.

    Each thread gets its own connection, so independent chains may run
    concurrently; calls within one chain are sequential by construction.
    """

    def __init__(self, endpoint: str, timeout: float = DEFAULT_TIMEOUT):
        self.endpoint = endpoint
        self.timeout = timeout
        self._local = threading.local()
        self._streams = []
        self._lock = threading.Lock()

    def _stream(self):
        stream = getattr(self._local, "stream", None)
        if stream is None:
            stream = open_stream(self.endpoint, self.timeout)
            try:
                self._handshake(stream)
            except BaseException:
                stream.close()
                raise
            self._local.stream = stream
            with self._lock:
                self._streams.append(stream)
        return stream

    @staticmethod
    def _handshake(stream):
        stream.send(HANDSHAKE.pack(MAGIC, VERSION))
        magic, version = HANDSHAKE.unpack(stream.recv_exact(HANDSHAKE.size))
        if magic != MAGIC:
            raise MalformedFrame(f"bad handshake magic {magic!r}")
        if version != VERSION:
            raise VersionMismatch(f"server speaks version {version}, client {VERSION}")

    def _predict_one(self, stream, x, t):
        h, w, c = x.shape
        stream.send(encode_frame(MSG_PREDICT, t, x))
        (msg_type,) = stream.recv_exact(1)
        if msg_type == MSG_ERROR:
            (n,) = _LEN.unpack(stream.recv_exact(_LEN.size))
            text = stream.recv_exact(n).decode("utf-8", "replace")
            raise RemoteError(f"server error: {text}")
        if msg_type != MSG_EPSILON:
            raise MalformedFrame(f"unexpected message type {msg_type}")
        rt, rh, rw, rc = _DIMS.unpack(stream.recv_exact(_DIMS.size))
        if rt != t:
            raise MalformedFrame(f"reply is for t={rt}, expected t={t}")
        if (rh, rw, rc) != (h, w, c):
            raise ShapeMismatch((h, w, c), (rh, rw, rc))
        payload = stream.recv_exact(4 * h * w * c)
        eps = np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(h, w, c)
        if not np.all(np.isfinite(eps)):
            raise MalformedFrame("reply payload contains non-finite values")
        return eps

    def predict(self, x_t, t):
        x_t = np.asarray(x_t, dtype=np.float64)
        if x_t.ndim < 3:
            raise ProtocolError(f"expected (..., H, W, C) input, got {x_t.shape}")
        stream = self._stream()
        flat = x_t.reshape(-1, *x_t.shape[-3:])
        try:
            out = np.stack([self._predict_one(stream, x, int(t)) for x in flat])
        except ProtocolError as exc:
            exc.timestep = int(t)
            # a broken stream cannot be resynchronized
            self._drop(stream)
            raise
        return out.reshape(x_t.shape)

    def _drop(self, stream):
        self._local.stream = None
        with self._lock:
            if stream in self._streams:
                self._streams.remove(stream)
        stream.close()

    def close(self):
        with self._lock:
            streams, self._streams = self._streams, []
        for s in streams:
            s.close()
        self._local = threading.local()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


# server side ---------------------------------------------------------------

def _read_exact(reader, n):
    buf = bytearray()
    while len(buf) < n:
        chunk = reader.read(n - len(buf))
        if not chunk:
            return None if not buf else bytes(buf)
        buf += chunk
    return bytes(buf)


def serve_stream(predict, reader, writer, version: int = VERSION) -> None:
    """Answer predict requests on a pair of binary file objects until EOF.

    ``predict(x, t)`` receives one float64 ``(H, W, C)`` array.
    """
    hello = _read_exact(reader, HANDSHAKE.size)
    if hello is None or len(hello) < HANDSHAKE.size:
        return
    writer.write(HANDSHAKE.pack(MAGIC, version))
    writer.flush()
    magic, client_version = HANDSHAKE.unpack(hello)
    if magic != MAGIC or client_version != version:
        return
    while True:
        head = _read_exact(reader, HEADER.size)
        if head is None or len(head) < HEADER.size:
            return
        msg_type, t, h, w, c = HEADER.unpack(head)
        payload = _read_exact(reader, 4 * h * w * c)
        if msg_type != MSG_PREDICT or payload is None or len(payload) < 4 * h * w * c:
            return
        x = np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(h, w, c)
        try:
            eps = np.asarray(predict(x, t))
        except Exception as exc:
            msg = str(exc).encode()
            writer.write(bytes([MSG_ERROR]) + _LEN.pack(len(msg)) + msg)
        else:
            writer.write(encode_frame(MSG_EPSILON, t, eps))
        writer.flush()


def serve_tcp(predict, host: str = "127.0.0.1", port: int = 0, ready=None) -> None:
    """Serve connections one thread each; ``ready(port)`` fires once listening."""
    with socket.create_server((host, port)) as srv:
        if ready is not None:
            ready(srv.getsockname()[1])
        while True:
            conn, _ = srv.accept()
            threading.Thread(target=_serve_conn, args=(predict, conn), daemon=True).start()


def _serve_conn(predict, conn):
    with conn, conn.makefile("rb") as r, conn.makefile("wb") as w:
        try:
            serve_stream(predict, r, w)
        except (OSError, ValueError):
            pass


def echo(x, t):
    return x


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Reference predictor server (echo).")
    parser.add_argument("--tcp", metavar="HOST:PORT", help="listen on TCP instead of stdio")
    args = parser.parse_args(argv)
    if args.tcp:
        host, _, port = args.tcp.rpartition(":")
        serve_tcp(echo, host or "127.0.0.1", int(port),
                  ready=lambda p: print(p, flush=True, file=sys.stderr))
    else:
        serve_stream(echo, sys.stdin.buffer, sys.stdout.buffer)
    return 0


if __name__ == "__main__":
    sys.exit(main())
