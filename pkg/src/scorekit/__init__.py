"""Spectral cutoff regeneration for diffusion samplers, with a closed-form Gaussian-field testbed."""

from .diffusion import (AnalyticGaussPredictor, ConstantGainPredictor, ScoreConfig, ZeroPredictor,
                        diffuse, epsilon_loss, reverse_step, sample, score_regenerate, sdedit)
from .errors import (ContractViolation, DataIntegrityError, DegenerateSpectrumError, DomainError,
                     ScoreError, SymmetryError)
from .grid import RngStream, byte_to_model, dft2, gaussian_field, idft2, model_to_byte
from .schedule import NoiseSchedule, alpha_bar_inverse, make_schedule, solve_tprime
from .spectral import (FlatSpectrum, PowerLawSpectrum, SpectrumProfile, corpus_profile, cutoff,
                       noise_profile, rapsd, snr_at)

__version__ = "0.1.0"

__all__ = [
    "AnalyticGaussPredictor", "ConstantGainPredictor", "ScoreConfig", "ZeroPredictor", "diffuse",
    "epsilon_loss", "reverse_step", "sample", "score_regenerate", "sdedit",
    "ContractViolation", "DataIntegrityError", "DegenerateSpectrumError", "DomainError",
    "ScoreError", "SymmetryError",
    "RngStream", "byte_to_model", "dft2", "gaussian_field", "idft2", "model_to_byte",
    "NoiseSchedule", "alpha_bar_inverse", "make_schedule", "solve_tprime",
    "FlatSpectrum", "PowerLawSpectrum", "SpectrumProfile", "corpus_profile", "cutoff",
    "noise_profile", "rapsd", "snr_at",
]
