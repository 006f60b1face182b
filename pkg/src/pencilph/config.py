"""Global tolerance configuration threaded through every rank decision."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput


@dataclass(frozen=True)
class ToleranceConfig:
    """Absolute/relative thresholds for rank, kernel and spectral decisions.

    Every rank or kernel decision in the package is a function of the input
    matrix and one ToleranceConfig only; there are no hidden per-operation
    tolerances.  ``atol`` also defines the half-width of the band around the
    imaginary axis inside which an eigenvalue counts as purely imaginary.
    """

    atol: float = 1e-10
    rtol: float = 1e-8

    def __post_init__(self):
        if not (self.atol > 0 and np.isfinite(self.atol)):
            raise InvalidInput(f"atol must be positive and finite, got {self.atol}")
        if not (self.rtol > 0 and np.isfinite(self.rtol)):
            raise InvalidInput(f"rtol must be positive and finite, got {self.rtol}")

    def svd_threshold(self, sigma_max: float) -> float:
        """Cutoff below which a singular value is treated as zero."""
        return max(self.atol, self.rtol * sigma_max)


DEFAULT_TOL = ToleranceConfig()
