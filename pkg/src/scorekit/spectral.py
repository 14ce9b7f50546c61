"""Radially averaged power spectra, SNR curves and the hard spectral cutoff."""

from __future__ import annotations

import csv
import hashlib
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataIntegrityError, DomainError
from .grid import (MAX_RADIUS, as_generator, check_image, dft2, idft2, mode_power,
                   radial_frequency)

log = logging.getLogger(__name__)

# radii are compared against the cutoff with this slack so that
# f_cutoff = sqrt(2)/2 keeps the corner coefficient
_RADIUS_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class SpectrumProfile:
    """Mean power per radial-frequency annulus.

    Attributes
    ----------
    freq : ndarray
        Bin centers in cycles/pixel, ascending; ``freq[0]`` is the DC annulus.
    power : ndarray
        Mean power of the DFT coefficients in each annulus.
    count : ndarray
        Number of coefficients per annulus.
    """

    freq: np.ndarray
    power: np.ndarray
    count: np.ndarray

    def __post_init__(self):
        freq = np.asarray(self.freq, dtype=np.float64)
        power = np.asarray(self.power, dtype=np.float64)
        count = np.asarray(self.count, dtype=np.int64)
        if not (freq.ndim == power.ndim == count.ndim == 1) or not (
            len(freq) == len(power) == len(count)
        ):
            raise DomainError("freq, power and count must be 1D arrays of equal length")
        if len(freq) < 2 or np.any(np.diff(freq) <= 0):
            raise DomainError("freq must hold at least two strictly increasing values")
        if not np.all(np.isfinite(power)) or np.any(power < 0):
            raise DomainError("power must be finite and non-negative")
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "power", power)
        object.__setattr__(self, "count", count)

    @property
    def bins(self) -> int:
        return len(self.freq)

    @property
    def energy(self) -> float:
        """Total spectral energy represented by the profile."""
        return float(np.sum(self.power * self.count))

    def __call__(self, f):
        """Power at radial frequency ``f``.

        Piecewise-linear between bin centers, constant beyond the first and
        last center.
        """
        return np.interp(f, self.freq, self.power)

    def same_binning(self, other: "SpectrumProfile") -> bool:
        return self.bins == other.bins and np.allclose(self.freq, other.freq, rtol=1e-12, atol=0)

    def digest(self) -> str:
        h = hashlib.sha256()
        for a in (self.freq, self.power, self.count):
            h.update(np.ascontiguousarray(a).astype("<f8").tobytes())
        return h.hexdigest()[:16]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            f.write(self.to_csv_text())

    def to_csv_text(self) -> str:
        lines = ["freq,power,count"]
        for fr, p, c in zip(self.freq, self.power, self.count):
            lines.append(f"{fr:.17g},{p:.17g},{int(c)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, path) -> "SpectrumProfile":
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames != ["freq", "power", "count"]:
                raise DataIntegrityError(f"{path}: expected header freq,power,count")
            rows = list(reader)
        if not rows:
            raise DataIntegrityError(f"{path}: no spectrum rows")
        try:
            return cls(
                freq=[float(r["freq"]) for r in rows],
                power=[float(r["power"]) for r in rows],
                count=[int(r["count"]) for r in rows],
            )
        except (TypeError, ValueError) as exc:
            raise DataIntegrityError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class PowerLawSpectrum:
    """``amplitude * (f + offset) ** -exponent + white``, a radial model spectrum."""

    amplitude: float
    offset: float
    exponent: float
    white: float = 0.0

    def __call__(self, f):
        f = np.asarray(f, dtype=np.float64)
        return self.amplitude * (f + self.offset) ** (-self.exponent) + self.white

    def plus_white(self, variance: float) -> "PowerLawSpectrum":
        return PowerLawSpectrum(self.amplitude, self.offset, self.exponent, self.white + variance)


@dataclass(frozen=True)
class FlatSpectrum:
    """Constant power at every frequency."""

    level: float

    def __call__(self, f):
        return np.full(np.shape(f), float(self.level))


@dataclass(frozen=True, eq=False)
class SnrCurve:
    """Per-bin signal-to-noise ratio of the forward process at timestep ``t``."""

    t: int
    freq: np.ndarray
    snr: np.ndarray


def default_bins(h: int, w: int) -> int:
    return math.ceil(min(h, w) / 2)


def max_bins(h: int, w: int) -> int:
    """Largest bin count allowed for an ``h`` x ``w`` grid (its radius in index units)."""
    return int(math.floor(math.hypot(h, w) / 2))


def bin_edges(bins: int) -> np.ndarray:
    return np.linspace(0.0, MAX_RADIUS, bins + 1)


def bin_index(h: int, w: int, bins: int) -> np.ndarray:
    """Annulus index of every coefficient.

    Bin ``i`` covers ``(edge_i, edge_{i+1}]``; DC belongs to bin 0, so a
    radius on an edge lands in the lower bin.
    """
    if bins < 2 or bins > max_bins(h, w):
        raise DomainError(f"bins must lie in [2, {max_bins(h, w)}] for {h}x{w}, got {bins}")
    width = MAX_RADIUS / bins
    idx = np.ceil(radial_frequency(h, w) / width).astype(np.int64) - 1
    return np.clip(idx, 0, bins - 1)


def radial_average(power2d, bins: int) -> SpectrumProfile:
    """Average a per-coefficient power map ``(H, W)`` over annuli."""
    power2d = np.asarray(power2d, dtype=np.float64)
    h, w = power2d.shape
    idx = bin_index(h, w, bins).ravel()
    count = np.bincount(idx, minlength=bins)
    if np.any(count == 0):
        empty = np.flatnonzero(count == 0).tolist()
        raise DomainError(f"{bins} bins leave annuli {empty} empty on a {h}x{w} grid")
    total = np.bincount(idx, weights=power2d.ravel(), minlength=bins)
    edges = bin_edges(bins)
    return SpectrumProfile(freq=0.5 * (edges[:-1] + edges[1:]), power=total / count, count=count)


def _power_map(x):
    """Channel-averaged |F(k)|^2 summed over leading batch axes, plus the batch size."""
    X = dft2(x)
    p = (X.real ** 2 + X.imag ** 2).mean(axis=-1)
    if p.ndim == 2:
        return p, 1
    n = int(np.prod(p.shape[:-2]))
    return p.reshape(n, *p.shape[-2:]).sum(axis=0), n


def rapsd(x, bins: int | None = None) -> SpectrumProfile:
    """Radially averaged power spectral density of one image.

    Power is ``|F(k)|**2`` under the unitary DFT, averaged over channels,
    so ``sum(power * count)`` equals the per-channel mean spectral energy.
    """
    x = check_image(x)
    h, w, _ = x.shape
    bins = default_bins(h, w) if bins is None else bins
    p, _ = _power_map(x)
    return radial_average(p, bins)


def corpus_profile(images, bins: int | None = None, chunk: int = 256) -> SpectrumProfile:
    """Mean RAPSD over a corpus (a sequence of images or an ``(N, H, W, C)`` array).

    Per-image RAPSDs are linear in the power map, so their mean equals the
    RAPSD of the mean power map; the sum runs in corpus order.
    """
    if isinstance(images, np.ndarray) and images.ndim == 4:
        stack = images
    else:
        images = [check_image(im) for im in images]
        if not images:
            raise DomainError("corpus is empty")
        shapes = {im.shape for im in images}
        if len(shapes) != 1:
            raise DomainError(f"corpus mixes image dimensions: {sorted(shapes)}")
        stack = np.stack(images)
    if len(stack) == 0:
        raise DomainError("corpus is empty")
    n, h, w, c = stack.shape
    if h < 2 or w < 2 or c not in (1, 3):
        raise DomainError(f"invalid image shape {stack.shape[1:]}")
    bins = default_bins(h, w) if bins is None else bins
    total = np.zeros((h, w))
    for start in range(0, n, chunk):
        p, _ = _power_map(stack[start:start + chunk])
        total += p
    return radial_average(total / n, bins)


def noise_profile(h: int, w: int, bins: int | None = None, mode: str = "analytic",
                  n: int = 1024, rng=None) -> SpectrumProfile:
    """Spectrum of unit white noise, ``P_T``.

    ``mode="analytic"`` returns the exact flat profile (every mode has
    variance 1 under the unitary DFT); ``mode="empirical"`` averages the
    RAPSDs of ``n`` sampled fields.
    """
    bins = default_bins(h, w) if bins is None else bins
    if mode == "analytic":
        return radial_average(np.ones((h, w)), bins)
    if mode != "empirical":
        raise DomainError(f"unknown noise profile mode {mode!r}")
    if n < 2:
        raise DomainError(f"empirical noise profile needs n >= 2, got {n}")
    if rng is None:
        raise DomainError("empirical noise profile needs an rng")
    gen = as_generator(rng)
    total = np.zeros((h, w))
    for start in range(0, n, 256):
        m = min(256, n - start)
        p, _ = _power_map(gen.standard_normal((m, h, w, 1)))
        total += p
    return radial_average(total / n, bins)


def snr_at(schedule, t: int, p0: SpectrumProfile, pT: SpectrumProfile) -> SnrCurve:
    """Forward-process SNR per bin: ``abar_t P0 / ((1 - abar_t) PT)``."""
    if not p0.same_binning(pT):
        raise DomainError("p0 and pT use different binnings")
    if not 1 <= t <= schedule.T:
        raise DomainError(f"t must lie in [1, {schedule.T}], got {t}")
    if np.any(pT.power <= 0):
        raise DomainError("pT has zero-power bins; SNR undefined")
    a = schedule.alpha_bar(t)
    return SnrCurve(t=t, freq=p0.freq.copy(), snr=a * p0.power / ((1.0 - a) * pT.power))


def snr_at_frequency(schedule, t: int, p0, pT, f: float) -> float:
    """SNR at a single frequency, with the spectra interpolated at ``f``."""
    a = schedule.alpha_bar(t)
    n = float(pT(f))
    if n <= 0:
        raise DomainError(f"pT is zero at f={f}")
    if a >= 1.0:
        return math.inf
    return a * float(p0(f)) / ((1.0 - a) * n)


def _check_cutoff(f_cutoff: float) -> None:
    if not 0.0 <= f_cutoff <= MAX_RADIUS:
        raise DomainError(f"f_cutoff must lie in [0, {MAX_RADIUS:.6f}], got {f_cutoff}")


def passband_mask(h: int, w: int, f_cutoff: float) -> np.ndarray:
    _check_cutoff(f_cutoff)
    return radial_frequency(h, w) <= f_cutoff + _RADIUS_EPS


def cutoff_spectrum(X, f_cutoff: float) -> np.ndarray:
    """Zero every coefficient with radius above ``f_cutoff``.

    ``X`` has shape ``(..., H, W, C)``. Passband values are copied, so the
    projection is bit-exactly idempotent.
    """
    X = np.asarray(X)
    h, w = X.shape[-3], X.shape[-2]
    mask = passband_mask(h, w, f_cutoff)[:, :, None]
    return np.where(mask, X, 0)


def cutoff(x, f_cutoff: float) -> np.ndarray:
    """Ideal low-pass filter of an image (or batch) at ``f_cutoff`` cycles/pixel."""
    _check_cutoff(f_cutoff)
    return idft2(cutoff_spectrum(dft2(x), f_cutoff))


def bins_above(profile: SpectrumProfile, f: float) -> np.ndarray:
    """Mask of bins lying entirely above frequency ``f``."""
    lower = profile.freq - profile.freq[0]
    return lower >= f - _RADIUS_EPS


def profile_from_spectrum(spectrum, h: int, w: int, bins: int | None = None) -> SpectrumProfile:
    """Expected RAPSD of a field whose coefficients have power ``spectrum(r(k))``."""
    bins = default_bins(h, w) if bins is None else bins
    return radial_average(mode_power(spectrum, h, w), bins)
