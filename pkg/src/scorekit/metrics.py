"""Log-spectral distance and PSNR for comparing image sets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .spectral import SpectrumProfile, bins_above

LOG_FLOOR = 1e-12


@dataclass(eq=False)
class EvalReport:
    """Spectral comparison of two corpora.

    ``gap`` is ``ln P_a - ln P_b`` per bin (after flooring both at
    ``floor``); ``distance`` sums its squares over the selected bins.
    """

    freq: np.ndarray
    power_a: np.ndarray
    power_b: np.ndarray
    gap: np.ndarray
    selected: np.ndarray
    distance: float
    floor: float = LOG_FLOOR
    n_a: int = 0
    n_b: int = 0
    psnr: float | None = None
    n_pairs: int = 0
    extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        psnr = self.psnr
        if psnr is not None and math.isinf(psnr):
            psnr = "inf"
        return {
            "log_spectral_distance": self.distance,
            "bins": int(len(self.freq)),
            "bins_used": int(np.count_nonzero(self.selected)),
            "log_floor": self.floor,
            "n_a": self.n_a,
            "n_b": self.n_b,
            "psnr_db": psnr,
            "n_pairs": self.n_pairs,
            **self.extra,
        }

    def table_csv(self) -> str:
        lines = ["freq,power_a,power_b,log_gap,used"]
        for row in zip(self.freq, self.power_a, self.power_b, self.gap, self.selected):
            f, a, b, g, u = row
            lines.append(f"{f:.17g},{a:.17g},{b:.17g},{g:.17g},{int(bool(u))}")
        return "\n".join(lines) + "\n"


def log_spectral_gap(pa: SpectrumProfile, pb: SpectrumProfile, floor: float = LOG_FLOOR):
    if not pa.same_binning(pb):
        raise DomainError("profiles use different binnings")
    return np.log(np.maximum(pa.power, floor)) - np.log(np.maximum(pb.power, floor))


def log_spectral_distance(pa: SpectrumProfile, pb: SpectrumProfile, above: float | None = None,
                          floor: float = LOG_FLOOR) -> float:
    """Sum of squared log-power differences, optionally only over bins above a frequency."""
    gap = log_spectral_gap(pa, pb, floor)
    sel = np.ones(len(gap), bool) if above is None else bins_above(pa, above)
    return float(np.sum(gap[sel] ** 2))


def psnr(a, b, peak_to_peak: float = 2.0) -> float:
    """PSNR in dB for model-scale images (dynamic range 2); ``inf`` if identical."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DomainError(f"cannot compare shapes {a.shape} and {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak_to_peak ** 2 / mse)


def compare_profiles(pa: SpectrumProfile, pb: SpectrumProfile, above: float | None = None,
                     floor: float = LOG_FLOOR, n_a: int = 0, n_b: int = 0) -> EvalReport:
    gap = log_spectral_gap(pa, pb, floor)
    sel = np.ones(len(gap), bool) if above is None else bins_above(pa, above)
    return EvalReport(freq=pa.freq, power_a=pa.power, power_b=pb.power, gap=gap, selected=sel,
                      distance=float(np.sum(gap[sel] ** 2)), floor=floor, n_a=n_a, n_b=n_b)
