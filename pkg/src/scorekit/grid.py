"""Raster conventions, the unitary 2D DFT and seedable random streams.

Images are plain ``numpy`` arrays of shape ``(H, W, C)`` in model scale
[-1, 1]. Batches stack along leading axes, ``(..., H, W, C)``; every
transform here acts on the two axes in front of the channel axis.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import DataIntegrityError, DomainError, SymmetryError

SPATIAL_AXES = (-3, -2)
MAX_RADIUS = float(np.sqrt(2.0) / 2.0)
# residual imaginary part tolerated when returning to the spatial domain
IMAG_TOL = 1e-7


def check_image(x, name="image") -> np.ndarray:
    """Validate a single ``(H, W, C)`` raster and return it as float64.

    A 2D array is promoted to one channel.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        x = x[:, :, None]
    if x.ndim != 3:
        raise DomainError(f"{name} must have shape (H, W, C), got {x.shape}")
    h, w, c = x.shape
    if h < 2 or w < 2:
        raise DomainError(f"{name} must be at least 2x2, got {h}x{w}")
    if c not in (1, 3):
        raise DomainError(f"{name} must have 1 or 3 channels, got {c}")
    if not np.all(np.isfinite(x)):
        raise DataIntegrityError(f"{name} contains non-finite values")
    return x


def byte_to_model(b) -> np.ndarray:
    """Map byte values 0..255 to model scale [-1, 1]."""
    return 2.0 * (np.asarray(b, dtype=np.float64) / 255.0) - 1.0


def model_to_byte(x, clamp: bool = True) -> np.ndarray:
    """Quantize model-scale values to uint8.

    Values outside [-1, 1] raise unless ``clamp`` is set.
    """
    x = np.asarray(x, dtype=np.float64)
    if not clamp and (x.min(initial=0.0) < -1.0 or x.max(initial=0.0) > 1.0):
        raise DomainError("values outside [-1, 1]; enable clamping for byte export")
    b = np.rint((x + 1.0) * 127.5)
    return np.clip(b, 0, 255).astype(np.uint8)


def dft2(x) -> np.ndarray:
    """Unitary 2D DFT of each channel, DC at index (0, 0).

    Parameters
    ----------
    x : array_like, shape (..., H, W, C)
        Real raster or batch of rasters.

    Returns
    -------
    numpy.ndarray
        Complex coefficients with the same shape. Under the unitary
        normalization ``sum |X|**2 == sum |x|**2``.
    """
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DataIntegrityError("dft2 input contains non-finite values")
    return np.fft.fft2(x, axes=SPATIAL_AXES, norm="ortho")


def idft2(X) -> np.ndarray:
    """Inverse of :func:`dft2`; the result must be real.

    Raises :class:`SymmetryError` if the spectrum is not Hermitian, judged
    by an imaginary residual above ``IMAG_TOL``.
    """
    X = np.asarray(X, dtype=np.complex128)
    if not np.all(np.isfinite(X)):
        raise DataIntegrityError("idft2 input contains non-finite values")
    x = np.fft.ifft2(X, axes=SPATIAL_AXES, norm="ortho")
    resid = float(np.max(np.abs(x.imag), initial=0.0))
    if resid > IMAG_TOL:
        raise SymmetryError(
            f"spectrum is not Hermitian: imaginary residual {resid:.3g} > {IMAG_TOL:g}"
        )
    return np.ascontiguousarray(x.real)


def radial_frequency(h: int, w: int) -> np.ndarray:
    """Radius of every DFT coefficient in cycles/pixel, shape (H, W).

    Frequencies are folded into [-0.5, 0.5) per axis so ``r(-k) == r(k)``.
    """
    fy = np.fft.fftfreq(h)
    fx = np.fft.fftfreq(w)
    return np.hypot(fy[:, None], fx[None, :])


def mode_power(spectrum, h: int, w: int) -> np.ndarray:
    """Evaluate a radial spectrum at every coefficient of an ``h`` x ``w`` grid.

    ``spectrum`` is any callable mapping radial frequency to power; a
    :class:`~scorekit.spectral.SpectrumProfile` interpolates its bins.
    """
    p = np.asarray(spectrum(radial_frequency(h, w)), dtype=np.float64)
    p = np.broadcast_to(p, (h, w))
    if not np.all(np.isfinite(p)):
        raise DomainError("spectrum evaluates to non-finite power")
    if np.any(p < 0):
        raise DomainError("spectrum has negative power")
    return p


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by ``(seed, stream)``.

    Backed by the counter-based Philox generator, so a given key yields the
    same numbers on every platform and independently of any other stream.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed % 2**64, self.stream % 2**64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, *keys) -> "RngStream":
        """Derive an independent stream from this one and ``keys``."""
        h = hashlib.blake2b(digest_size=8)
        h.update(repr((self.seed, self.stream) + tuple(keys)).encode())
        return RngStream(self.seed, int.from_bytes(h.digest(), "little"))


def as_generator(rng) -> np.random.Generator:
    """Accept an :class:`RngStream`, a Generator or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")


def gaussian_field(profile, h: int, w: int, rng, channels: int = 1, n: int | None = None):
    """Draw a zero-mean stationary Gaussian field with a radial spectrum.

    White noise is shaped in the frequency domain by ``sqrt(P(r(k)))``, so
    the expected power of every coefficient is ``P(r(k))``.

    Parameters
    ----------
    profile : callable
        Radial power spectrum (e.g. a ``SpectrumProfile``).
    h, w : int
        Field size.
    rng : RngStream or numpy.random.Generator
    channels : int
        1 or 3; channels are independent.
    n : int, optional
        Draw a batch of ``n`` fields, shape ``(n, h, w, channels)``.
    """
    if channels not in (1, 3):
        raise DomainError(f"channels must be 1 or 3, got {channels}")
    amp = np.sqrt(mode_power(profile, h, w))[:, :, None]
    gen = as_generator(rng)
    shape = (h, w, channels) if n is None else (n, h, w, channels)
    white = gen.standard_normal(shape)
    return idft2(dft2(white) * amp)
