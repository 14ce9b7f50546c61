"""Forward diffusion, DDPM reverse sampling, SDEdit and cutoff regeneration.

All chain functions take arrays of shape ``(..., H, W, C)``, so a batch of
independent chains advances in one call. Randomness comes from the ``rng``
argument (an :class:`~scorekit.grid.RngStream` or a numpy Generator).
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import ContractViolation, DomainError
from .grid import as_generator, dft2, idft2, mode_power
from .schedule import NoiseSchedule, solve_tprime
from .spectral import cutoff

log = logging.getLogger(__name__)


class ZeroPredictor:
    """Predicts no noise at all; the trivial baseline for the loss."""

    def predict(self, x_t, t):
        return np.zeros_like(np.asarray(x_t, dtype=np.float64))


class _SpectralPredictor:
    def __init__(self, schedule: NoiseSchedule):
        self.schedule = schedule

    def _check_t(self, t):
        if not 1 <= t <= self.schedule.T:
            raise DomainError(f"t must lie in [1, {self.schedule.T}], got {t}")

    def gain(self, t, h, w):
        """Per-coefficient map from x_t to the clean estimate, shape (H, W, 1)."""
        raise NotImplementedError

    def predict(self, x_t, t):
        self._check_t(t)
        x_t = np.asarray(x_t, dtype=np.float64)
        a = self.schedule.alpha_bar(t)
        h, w = x_t.shape[-3], x_t.shape[-2]
        x0_hat = idft2(dft2(x_t) * self.gain(t, h, w))
        return (x_t - math.sqrt(a) * x0_hat) / math.sqrt(1.0 - a)


class AnalyticGaussPredictor(_SpectralPredictor):
    """Exact MMSE noise predictor for stationary Gaussian fields.

    For clean data with per-coefficient power ``S(r(k))`` the posterior mean
    of the clean coefficient is ``sqrt(a) S / (a S + 1 - a) * x_t(k)`` with
    ``a = alpha_bar_t``; the noise estimate follows from the forward model.

    Parameters
    ----------
    spectrum : callable
        Radial power spectrum of the clean fields (``SpectrumProfile``,
        ``PowerLawSpectrum``, ...).
    schedule : NoiseSchedule
    """

    def __init__(self, spectrum, schedule: NoiseSchedule):
        super().__init__(schedule)
        self.spectrum = spectrum
        self._power = {}

    def mode_power(self, h, w):
        key = (h, w)
        if key not in self._power:
            self._power[key] = mode_power(self.spectrum, h, w)[:, :, None]
        return self._power[key]

    def shrinkage(self, t, h, w):
        """Gain in [0, 1] applied to ``x_t / sqrt(a)``; it tends to 1 as S grows."""
        a = self.schedule.alpha_bar(t)
        S = self.mode_power(h, w)
        return a * S / (a * S + (1.0 - a))

    def gain(self, t, h, w):
        return self.shrinkage(t, h, w) / math.sqrt(self.schedule.alpha_bar(t))


class ConstantGainPredictor(_SpectralPredictor):
    """Ablation of the analytic predictor with one shrinkage gain for every mode."""

    def __init__(self, g: float, schedule: NoiseSchedule):
        super().__init__(schedule)
        self.g = float(g)

    def gain(self, t, h, w):
        return np.full((h, w, 1), self.g / math.sqrt(self.schedule.alpha_bar(t)))


def _predict(pred, x_t, t):
    eps = np.asarray(pred.predict(x_t, t), dtype=np.float64)
    if eps.shape != x_t.shape:
        raise ContractViolation(
            f"predictor returned shape {eps.shape} for input {x_t.shape} at t={t}")
    if not np.all(np.isfinite(eps)):
        raise ContractViolation(f"predictor returned non-finite values at t={t}")
    return eps


def diffuse(x0, t: int, s: NoiseSchedule, rng):
    """Sample ``x_t = sqrt(a) x0 + sqrt(1 - a) eps`` for ``a = alpha_bar_t``."""
    if not 0 <= t <= s.T:
        raise DomainError(f"t must lie in [0, {s.T}], got {t}")
    x0 = np.asarray(x0, dtype=np.float64)
    if t == 0:
        return x0.copy()
    a = s.alpha_bar(t)
    eps = as_generator(rng).standard_normal(x0.shape)
    return math.sqrt(a) * x0 + math.sqrt(1.0 - a) * eps


def reverse_step(x_t, t: int, pred, s: NoiseSchedule, rng, final_step_noise: bool = False):
    """One DDPM ancestral step from ``x_t`` to ``x_{t-1}``.

    The stochastic term uses ``sigma_t = sqrt(beta_t)`` and is omitted at
    ``t = 1`` unless ``final_step_noise`` is set.
    """
    if not 1 <= t <= s.T:
        raise DomainError(f"t must lie in [1, {s.T}], got {t}")
    x_t = np.asarray(x_t, dtype=np.float64)
    eps = _predict(pred, x_t, t)
    beta = s.beta(t)
    mean = (x_t - beta / math.sqrt(1.0 - s.alpha_bar(t)) * eps) / math.sqrt(1.0 - beta)
    if t == 1 and not final_step_noise:
        return mean
    z = as_generator(rng).standard_normal(x_t.shape)
    return mean + math.sqrt(beta) * z


def run_chain(x, t_start: int, pred, s: NoiseSchedule, rng, final_step_noise: bool = False):
    """Apply reverse steps ``t_start, ..., 1`` to ``x``."""
    gen = as_generator(rng)
    for t in range(t_start, 0, -1):
        x = reverse_step(x, t, pred, s, gen, final_step_noise)
    return x


def sample(pred, s: NoiseSchedule, shape, rng, final_step_noise: bool = False):
    """Generate from pure noise: ``x_T ~ N(0, I)``, then the full reverse chain."""
    gen = as_generator(rng)
    x = gen.standard_normal(tuple(shape))
    return run_chain(x, s.T, pred, s, gen, final_step_noise)


def sdedit(x, t_prime: int, pred, s: NoiseSchedule, rng, final_step_noise: bool = False):
    """Re-diffuse ``x`` to ``t_prime`` and denoise back to step 0."""
    if not 0 <= t_prime <= s.T:
        raise DomainError(f"t_prime must lie in [0, {s.T}], got {t_prime}")
    x = np.asarray(x, dtype=np.float64)
    if t_prime == 0:
        return x.copy()
    gen = as_generator(rng)
    return run_chain(diffuse(x, t_prime, s, gen), t_prime, pred, s, gen, final_step_noise)


@dataclass(frozen=True)
class ScoreConfig:
    """Everything needed to reproduce one cutoff-regeneration run.

    ``t_prime=None`` means "derive from spectra"; :meth:`resolve` fills it
    in and records digests of the spectra used.
    """

    f_cutoff: float
    t_prime: int | None = None
    seed: int = 0
    final_step_noise: bool = False
    clamp: bool = False
    t_prime_derived: bool = False
    p0_digest: str | None = None
    pT_digest: str | None = None

    def resolve(self, s: NoiseSchedule, p0=None, pT=None) -> "ScoreConfig":
        if self.t_prime is not None:
            if not 0 <= self.t_prime <= s.T:
                raise DomainError(f"t_prime must lie in [0, {s.T}], got {self.t_prime}")
            return self
        if p0 is None or pT is None:
            raise DomainError("deriving t_prime requires both p0 and pT")
        return replace(self, t_prime=solve_tprime(s, p0, pT, self.f_cutoff),
                       t_prime_derived=True, p0_digest=p0.digest(), pT_digest=pT.digest())

    def to_dict(self) -> dict:
        return asdict(self)


def score_regenerate(x, cfg: ScoreConfig, pred, s: NoiseSchedule, p0=None, pT=None, rng=None):
    """Low-pass ``x`` at ``cfg.f_cutoff`` and regenerate the removed band.

    The cutoff image is re-diffused to ``t'`` and denoised back, so only
    detail the noise level at ``t'`` has drowned gets re-synthesized.
    ``t'`` is taken from ``cfg`` or derived from ``p0``/``pT``.
    """
    cfg = cfg.resolve(s, p0, pT)
    gen = as_generator(cfg.seed if rng is None else rng)
    x_cut = cutoff(x, cfg.f_cutoff)
    if cfg.t_prime == 0:
        log.warning("t_prime = 0 at f_cutoff=%g; returning the cutoff image unchanged",
                    cfg.f_cutoff)
        out = x_cut
    else:
        out = run_chain(diffuse(x_cut, cfg.t_prime, s, gen), cfg.t_prime, pred, s, gen,
                        cfg.final_step_noise)
    return np.clip(out, -1.0, 1.0) if cfg.clamp else out


def epsilon_loss(pred, x0, t: int, s: NoiseSchedule, rng) -> float:
    """Empirical ``E ||eps - pred(x_t, t)||^2`` per element at a fixed ``t``."""
    x0 = np.asarray(x0, dtype=np.float64)
    gen = as_generator(rng)
    eps = gen.standard_normal(x0.shape)
    a = s.alpha_bar(t)
    x_t = math.sqrt(a) * x0 + math.sqrt(1.0 - a) * eps
    return float(np.mean((eps - _predict(pred, x_t, t)) ** 2))
