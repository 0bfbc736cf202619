"""Super-exponential mode weights, handled entirely in the log domain.

The weight on fiber mode k is

    gamma_k^2 = 8^|k| * |k|! * exp(|k| * sigma),   sigma > 0,

which overflows float64 around |k| ~ 60, so every quantity below is a
log of a square weight and comparisons are log-domain inequalities.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.special import gammaln

__all__ = ["CarlemanWeights", "WeightCertificate", "make_weights"]

_LOG8 = np.log(8.0)


@dataclasses.dataclass(frozen=True)
class WeightCertificate:
    """Margins (in log space) for the three structural weight inequalities.

    Each margin array holds log(lhs) - log(rhs) for the claimed strict
    inequality at every k in range; all entries must be positive.
    """

    skip_two: np.ndarray      # log gamma_k^2 - log(4 gamma_{k-2}^2), k >= 3
    step_one: np.ndarray      # log gamma_k^2 - log(8 k gamma_{k-1}^2), k >= 2
    sigma_gap: np.ndarray     # log(gamma_k^2 / e^sigma) - log gamma_{k-1}^2, k >= 1
    ok: bool


class CarlemanWeights:
    def __init__(self, sigma: float, k_max: int = 64):
        sigma = float(sigma)
        if not sigma > 0.0:
            raise ValueError(f"sigma must be strictly positive, got {sigma}")
        if k_max < 1:
            raise ValueError("k_max must be at least 1")
        self.sigma = sigma
        self.k_max = int(k_max)
        k = np.arange(self.k_max + 1, dtype=float)
        # log gamma_k^2 for k = 0..k_max; extend to negative k by |k|.
        self._log_sq = k * _LOG8 + gammaln(k + 1.0) + k * sigma

    def log_gamma_sq(self, k):
        """log(gamma_k^2) for integer modes k (vectorized, symmetric in k)."""
        a = np.abs(np.asarray(k, dtype=int))
        if np.any(a > self.k_max):
            raise ValueError(f"mode out of range (k_max={self.k_max})")
        return self._log_sq[a]

    def gamma_sq(self, k):
        """gamma_k^2 itself; overflows for |k| beyond ~60, prefer log_gamma_sq."""
        return np.exp(self.log_gamma_sq(k))

    def certificate(self) -> WeightCertificate:
        ls = self._log_sq
        k = np.arange(self.k_max + 1, dtype=float)
        skip_two = ls[3:] - (np.log(4.0) + ls[1:-2])
        step_one = ls[2:] - (np.log(8.0 * k[2:]) + ls[1:-1])
        sigma_gap = (ls[1:] - self.sigma) - ls[:-1]
        ok = bool(
            np.all(skip_two > 0) and np.all(step_one > 0) and np.all(sigma_gap >= 0)
        )
        return WeightCertificate(skip_two, step_one, sigma_gap, ok)


def make_weights(sigma: float, k_max: int = 64) -> CarlemanWeights:
    """Build weights and verify the structural inequalities they rely on."""
    w = CarlemanWeights(sigma, k_max)
    cert = w.certificate()
    if not cert.ok:
        raise AssertionError("weight inequalities failed (unreachable for sigma > 0)")
    return w
