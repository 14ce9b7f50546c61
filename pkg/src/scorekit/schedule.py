"""Discrete noise schedules and the inverse lookup of the cumulative alpha."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrumError, DomainError

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    """Per-step betas and cumulative products ``alpha_bar``.

    Both arrays are indexed by timestep and have length ``T + 1``; index 0
    is the clean state (``beta_0 = 0``, ``alpha_bar_0 = 1``).
    """

    kind: str
    betas: np.ndarray
    alpha_bars: np.ndarray

    def __post_init__(self):
        betas = np.asarray(self.betas, dtype=np.float64)
        abar = np.asarray(self.alpha_bars, dtype=np.float64)
        if betas.shape != abar.shape or betas.ndim != 1 or len(betas) < 2:
            raise DomainError("betas and alpha_bars must be 1D arrays of length T + 1 >= 2")
        if betas[0] != 0.0 or abar[0] != 1.0:
            raise DomainError("index 0 must hold beta = 0 and alpha_bar = 1")
        if np.any(betas[1:] <= 0) or np.any(betas[1:] >= 1):
            raise DomainError("every beta_t must lie in (0, 1)")
        if np.any(np.diff(abar) >= 0):
            raise DomainError("alpha_bar must be strictly decreasing")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "alpha_bars", abar)

    @property
    def T(self) -> int:
        return len(self.betas) - 1

    def alpha_bar(self, t: int) -> float:
        return float(self.alpha_bars[t])

    def beta(self, t: int) -> float:
        return float(self.betas[t])

    def params(self) -> dict:
        return {"kind": self.kind, "T": self.T}

    @classmethod
    def from_betas(cls, betas, kind: str = "custom") -> "NoiseSchedule":
        betas = np.asarray(betas, dtype=np.float64)
        abar = np.concatenate([[1.0], np.cumprod(1.0 - betas)])
        return cls(kind, np.concatenate([[0.0], betas]), abar)


def make_schedule(kind: str = "linear", T: int = 1000, beta_start: float = 1e-4,
                  beta_end: float = 0.02, cosine_offset: float = 0.008,
                  max_beta: float = 0.999) -> NoiseSchedule:
    """Build a linear or cosine schedule.

    ``linear`` spaces beta uniformly from ``beta_start`` to ``beta_end``
    inclusive. ``cosine`` uses the squared-cosine cumulative alpha with the
    given offset and clips each beta to ``max_beta``; alpha_bar is then
    recomputed from the clipped betas.
    """
    if not isinstance(T, (int, np.integer)) or T < 1:
        raise DomainError(f"T must be a positive integer, got {T!r}")
    if kind == "linear":
        if not 0.0 < beta_start <= beta_end < 1.0:
            raise DomainError(
                f"linear schedule needs 0 < beta_start <= beta_end < 1, got {beta_start}, {beta_end}"
            )
        betas = np.linspace(beta_start, beta_end, T) if T > 1 else np.array([beta_start])
    elif kind == "cosine":
        if cosine_offset <= 0 or not 0 < max_beta < 1:
            raise DomainError("cosine schedule needs offset > 0 and 0 < max_beta < 1")
        steps = np.arange(T + 1, dtype=np.float64) / T
        f = np.cos((steps + cosine_offset) / (1 + cosine_offset) * math.pi / 2) ** 2
        abar = f / f[0]
        betas = np.clip(1.0 - abar[1:] / abar[:-1], 1e-12, max_beta)
    else:
        raise DomainError(f"unknown schedule kind {kind!r}")
    sched = NoiseSchedule.from_betas(betas, kind=kind)
    return sched


def alpha_bar_inverse(s: NoiseSchedule, y: float) -> int:
    """Timestep whose alpha_bar is nearest to ``y``; ties go to the smaller t.

    ``t = 0`` means no diffusion is needed.
    """
    if not (0.0 < y <= 1.0) or math.isnan(y):
        raise DomainError(f"target alpha_bar must lie in (0, 1], got {y}")
    # argmin returns the first minimum, which is the smaller timestep
    return int(np.argmin(np.abs(s.alpha_bars - y)))


def crossover_alpha_bar(p0, pT, f_cutoff: float) -> float:
    """alpha_bar at which signal and noise power are equal at ``f_cutoff``."""
    if not p0.same_binning(pT):
        raise DomainError("p0 and pT use different binnings")
    if f_cutoff < p0.freq[0] or f_cutoff > p0.freq[-1]:
        log.warning("f_cutoff=%g lies outside the bin centers [%g, %g]; "
                    "spectra are extrapolated as constants", f_cutoff, p0.freq[0], p0.freq[-1])
    s0 = float(p0(f_cutoff))
    sT = float(pT(f_cutoff))
    if s0 + sT <= 0:
        raise DegenerateSpectrumError(f"P0 + PT vanishes at f_cutoff={f_cutoff}")
    return sT / (s0 + sT)


def solve_tprime(s: NoiseSchedule, p0, pT, f_cutoff: float) -> int:
    """SDEdit start step at which the SNR at ``f_cutoff`` crosses one."""
    y = crossover_alpha_bar(p0, pT, f_cutoff)
    if y <= 0.0:
        # P_T vanishes: no noise level is ever weak enough, start from pure noise
        return s.T
    return alpha_bar_inverse(s, y)
