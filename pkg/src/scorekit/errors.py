"""Exception hierarchy shared by every scorekit module."""


class ScoreError(Exception):
    """Base class for all scorekit errors."""


class DomainError(ScoreError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class DataIntegrityError(ScoreError, ValueError):
    """Input data is non-finite or otherwise corrupt."""


class SymmetryError(DataIntegrityError):
    """A spectrum is not Hermitian, so its inverse transform is not real."""


class DegenerateSpectrumError(DomainError):
    """Spectra provide no usable power at the requested frequency."""


class ContractViolation(ScoreError):
    """A collaborator (typically an epsilon predictor) broke its contract."""


class ImageReadError(ScoreError):
    """An image file could not be read or decoded."""

    def __init__(self, path, reason):
        super().__init__(f"{path}: {reason}")
        self.path = str(path)
        self.reason = reason
