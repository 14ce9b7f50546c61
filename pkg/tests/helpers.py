"""Shared test helpers: scripted protocol servers and reproducible CLI invocations."""

import json
import socket
import sys
import threading

import numpy as np

from scorekit import spectral
from scorekit.cli import main
from scorekit.protocol import HANDSHAKE, HEADER, MAGIC, VERSION, serve_tcp

POWER_LAW = "0.002,0.05,1.5"
# short schedule so CLI tests run full chains quickly
FAST = ["--T", "60", "--beta-start", "1e-3", "--beta-end", "0.08"]


def run(*argv):
    return main([str(a) for a in argv])


def snapshot(directory):
    """Bytes of every output file, with the wall-clock field removed from run.json."""
    out = {}
    for p in sorted(directory.rglob("*")):
        if p.is_file():
            data = p.read_bytes()
            if p.name == "run.json":
                rec = json.loads(data)
                rec.pop("duration_s")
                data = json.dumps(rec, sort_keys=True).encode()
            out[str(p.relative_to(directory))] = data
    return out


# argv builders keyed by subcommand; ``d`` is a directory made by gen-synthetic
COMMANDS = {
    "gen-synthetic": lambda d, out: ["gen-synthetic", "--n", 6, "--size", "8x8",
                                     "--power-law", POWER_LAW, "--seed", 4, "--out", out],
    "spectrum": lambda d, out: ["spectrum", d, "--out", out],
    "solve-tprime": lambda d, out: ["solve-tprime", "--p0", d / "spectrum.csv",
                                    "--f-cutoff", 0.2, 0.3, "--out", out],
    "inject": lambda d, out: ["inject", d, "--kind", "mix", "--seed", 2, "--out", out],
    "mixture": lambda d, out: ["mixture", d, "--noisy-fraction", 0.5, "--kind", "poisson",
                               "--seed", 2, "--out", out],
    "sample": lambda d, out: ["sample", "--n", 3, "--size", "8x8", "--power-law", POWER_LAW,
                              "--seed", 2, "--jobs", 2, "--out", out, *FAST],
    "sdedit": lambda d, out: ["sdedit", d, "--t-prime", 10, "--power-law", POWER_LAW,
                              "--seed", 2, "--out", out, *FAST],
    "score": lambda d, out: ["score", d, "--f-cutoff", 0.3, "--p0", d / "spectrum.csv",
                             "--power-law", POWER_LAW, "--seed", 2, "--out", out, *FAST],
    "eval": lambda d, out: ["eval", d, d, "--paired", "--out", out],
}


def start_server(handler):
    """Accept connections on a loopback port and run ``handler(conn)`` on each."""
    srv = socket.create_server(("127.0.0.1", 0))
    port = srv.getsockname()[1]

    def loop():
        while True:
            try:
                conn, _ = srv.accept()
            except OSError:
                return
            threading.Thread(target=handler, args=(conn,), daemon=True).start()

    threading.Thread(target=loop, daemon=True).start()
    return srv, f"tcp://127.0.0.1:{port}"


def start_predictor_server(predict):
    """Serve ``predict`` with the library's own server; returns the endpoint."""
    ready = threading.Event()
    port = []

    def on_ready(p):
        port.append(p)
        ready.set()

    threading.Thread(target=serve_tcp, args=(predict, "127.0.0.1", 0, on_ready),
                     daemon=True).start()
    ready.wait(5)
    return f"tcp://127.0.0.1:{port[0]}"


def recv_exact(conn, n):
    buf = b""
    while len(buf) < n:
        chunk = conn.recv(n - len(buf))
        if not chunk:
            raise EOFError
        buf += chunk
    return buf


def scripted(reply):
    """Handler that handshakes and answers every request with ``reply(t, h, w, c, payload)``."""
    def handler(conn):
        with conn:
            recv_exact(conn, HANDSHAKE.size)
            conn.sendall(HANDSHAKE.pack(MAGIC, VERSION))
            while True:
                try:
                    _, t, h, w, c = HEADER.unpack(recv_exact(conn, HEADER.size))
                    payload = recv_exact(conn, 4 * h * w * c)
                except (EOFError, OSError):
                    return
                data = reply(t, h, w, c, payload)
                conn.sendall(data)
                if data is None or len(data) < HEADER.size or data[:1] not in (b"\x02", b"\x03"):
                    return
    return handler


# Energy audit: every rapsd / corpus_profile call made while the suite runs is
# checked against the pixel-domain energy of its input.
ENERGY_AUDIT = []


def _pixel_energy(x):
    """Channel-averaged sum of squares of one image, or its corpus mean for a stack."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        x = x[..., None]
    return float(np.mean(np.sum(x * x, axis=(-3, -2)), axis=-1).mean())


def audited(fn, stack):
    def wrapper(images, *args, **kwargs):
        prof = fn(images, *args, **kwargs)
        data = np.stack([np.asarray(im) for im in images]) if stack and not (
            isinstance(images, np.ndarray) and images.ndim == 4) else images
        ref = _pixel_energy(data)
        err = abs(prof.energy - ref) / ref if ref > 0 else abs(prof.energy)
        ENERGY_AUDIT.append((fn.__name__, np.shape(data), err))
        return prof
    wrapper.__wrapped__ = fn
    return wrapper


def install_energy_audit(monkeypatch):
    targets = {spectral.rapsd: audited(spectral.rapsd, False),
               spectral.corpus_profile: audited(spectral.corpus_profile, True)}
    for mod in list(sys.modules.values()):
        namespace = getattr(mod, "__dict__", None)
        if not isinstance(namespace, dict):
            continue
        for name, value in list(namespace.items()):
            if callable(value) and not isinstance(value, type):
                try:
                    wrapped = targets.get(value)
                except TypeError:
                    continue
                if wrapped is not None:
                    monkeypatch.setattr(mod, name, wrapped)
