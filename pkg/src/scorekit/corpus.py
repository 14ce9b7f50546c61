"""Synthetic noise injection and clean/noisy mixture corpora.

Noise levels are given in byte scale (0..255) and applied in model scale,
where one byte step is ``2/255``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataIntegrityError, DomainError, ScoreError
from .grid import RngStream, as_generator
from .imageio import atomic_write_bytes, list_images, read_images, write_image

BYTE_TO_MODEL = 2.0 / 255.0
NOISE_KINDS = ("gaussian", "poisson", "mix")


def inject_gaussian(x, sigma_byte: float, rng, clamp: bool = False):
    """Add zero-mean Gaussian noise with byte-scale std ``sigma_byte``."""
    if sigma_byte < 0:
        raise DomainError(f"sigma must be non-negative, got {sigma_byte}")
    x = np.asarray(x, dtype=np.float64)
    out = x + as_generator(rng).normal(0.0, sigma_byte * BYTE_TO_MODEL, size=x.shape)
    return np.clip(out, -1.0, 1.0) if clamp else out


def inject_poisson(x, lam: float, rng, clamp: bool = False):
    """Add centered Poisson noise ``Pois(lam) - lam`` (byte scale), independent of the signal."""
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    x = np.asarray(x, dtype=np.float64)
    counts = as_generator(rng).poisson(lam, size=x.shape)
    out = x + (counts - lam) * BYTE_TO_MODEL
    return np.clip(out, -1.0, 1.0) if clamp else out


def inject_mix(x, lam: float, sigma_byte: float, rng, clamp: bool = False):
    """Poisson noise followed by Gaussian noise, each from its own sub-stream."""
    if isinstance(rng, RngStream):
        r_pois, r_gauss = rng.child("poisson"), rng.child("gaussian")
    else:
        r_pois, r_gauss = as_generator(rng).spawn(2)
    y = inject_poisson(x, lam, r_pois)
    return inject_gaussian(y, sigma_byte, r_gauss, clamp=clamp)


def inject(x, kind: str, rng, sigma_byte: float = 25.0, lam: float = 30.0, clamp: bool = False):
    if kind == "gaussian":
        return inject_gaussian(x, sigma_byte, rng, clamp)
    if kind == "poisson":
        return inject_poisson(x, lam, rng, clamp)
    if kind == "mix":
        return inject_mix(x, lam, sigma_byte, rng, clamp)
    raise DomainError(f"unknown noise kind {kind!r}; choose from {NOISE_KINDS}")


def noisy_count(n: int, noisy_fraction: float) -> int:
    """``round(n * fraction)`` with halves rounded up."""
    return int(math.floor(n * noisy_fraction + 0.5))


@dataclass
class CorpusManifest:
    """Role assignment of a mixture corpus.

    Serialized as ``key=value`` header lines, a blank line, then one
    ``role<TAB>path`` line per entry.
    """

    entries: list[tuple[str, str]]
    dims: tuple[int, int, int]
    seed: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for role, _ in self.entries:
            if role not in ("clean", "noisy"):
                raise DomainError(f"unknown role {role!r}")
        self.dims = tuple(int(d) for d in self.dims)

    def paths(self, role: str | None = None) -> list[str]:
        return [p for r, p in self.entries if role is None or r == role]

    @property
    def clean_fraction(self) -> float:
        return len(self.paths("clean")) / len(self.entries) if self.entries else 0.0

    def to_text(self) -> str:
        h, w, c = self.dims
        header = {"dims": f"{h}x{w}x{c}", "seed": self.seed,
                  "clean": len(self.paths("clean")), "noisy": len(self.paths("noisy"))}
        header.update(self.params)
        lines = [f"{k}={v}" for k, v in header.items()]
        lines.append("")
        lines += [f"{role}\t{path}" for role, path in self.entries]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        atomic_write_bytes(path, self.to_text().encode())

    @classmethod
    def from_text(cls, text: str) -> "CorpusManifest":
        head, sep, body = text.partition("\n\n")
        if not sep:
            raise DataIntegrityError("manifest lacks the blank line after its header")
        header = {}
        for line in head.splitlines():
            key, eq, value = line.partition("=")
            if not eq:
                raise DataIntegrityError(f"bad manifest header line {line!r}")
            header[key] = value
        entries = []
        for line in body.splitlines():
            if not line:
                continue
            role, tab, path = line.partition("\t")
            if not tab:
                raise DataIntegrityError(f"bad manifest entry {line!r}")
            entries.append((role, path))
        try:
            dims = tuple(int(v) for v in header.pop("dims").split("x"))
            seed = int(header.pop("seed"))
            counts = {r: int(header.pop(r)) for r in ("clean", "noisy")}
        except (KeyError, ValueError) as exc:
            raise DataIntegrityError(f"manifest header incomplete: {exc}") from exc
        m = cls(entries, dims, seed, header)
        if counts != {r: len(m.paths(r)) for r in ("clean", "noisy")}:
            raise DataIntegrityError("manifest counts disagree with its entries")
        return m

    @classmethod
    def load(cls, path) -> "CorpusManifest":
        m = cls.from_text(Path(path).read_text())
        base = Path(path).parent
        m.entries = [(r, str(p if Path(p).is_absolute() else base / p)) for r, p in m.entries]
        return m


class CorpusError(ScoreError):
    """One or more corpus files failed; ``errors`` lists each of them."""

    def __init__(self, errors):
        super().__init__("; ".join(str(e) for e in errors))
        self.errors = list(errors)


def build_mixture(clean_dir, out_dir, noisy_fraction: float, noise_kind: str, seed: int,
                  sigma_byte: float = 25.0, lam: float = 30.0, out_format: str = "scr",
                  clamp: bool = False) -> CorpusManifest:
    """Corrupt an exact fraction of a clean image folder.

    Exactly ``round(N * noisy_fraction)`` images, picked by a seeded
    shuffle, get noisy copies written to ``out_dir``; the rest stay in
    place as the clean subset. File ``i`` draws its noise from stream
    ``RngStream(seed).child("inject", i)``, so results do not depend on
    processing order. The manifest, with paths relative to itself, is
    written to ``out_dir/manifest.tsv``.
    """
    if not 0.0 <= noisy_fraction <= 1.0:
        raise DomainError(f"noisy_fraction must lie in [0, 1], got {noisy_fraction}")
    if noise_kind not in NOISE_KINDS:
        raise DomainError(f"unknown noise kind {noise_kind!r}")
    paths = list_images(clean_dir)
    if not paths:
        raise DomainError(f"no images in {clean_dir}")
    images, errors = read_images(paths)
    if errors:
        raise CorpusError(errors)
    shapes = {im.shape for im in images}
    if len(shapes) != 1:
        bad = [f"{p}: shape {im.shape}" for p, im in zip(paths, images) if im.shape != images[0].shape]
        raise CorpusError([DomainError(f"mismatched dimensions, expected {images[0].shape}: {b}")
                           for b in bad])
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    root = RngStream(seed)
    order = root.child("assign").generator().permutation(len(paths))
    noisy = set(order[:noisy_count(len(paths), noisy_fraction)].tolist())
    entries = []
    for i, (p, im) in enumerate(zip(paths, images)):
        if i in noisy:
            target = out_dir / f"{p.stem}.{out_format}"
            write_image(target, inject(im, noise_kind, root.child("inject", i), sigma_byte, lam,
                                       clamp=clamp), clamp=clamp)
            entries.append(("noisy", os.path.relpath(target, out_dir)))
        else:
            entries.append(("clean", os.path.relpath(p, out_dir)))
    params = {"noise_kind": noise_kind, "noisy_fraction": repr(float(noisy_fraction))}
    if noise_kind in ("gaussian", "mix"):
        params["sigma_byte"] = repr(float(sigma_byte))
    if noise_kind in ("poisson", "mix"):
        params["lam"] = repr(float(lam))
    manifest = CorpusManifest(entries, images[0].shape, seed, params)
    manifest.save(out_dir / "manifest.tsv")
    return manifest
