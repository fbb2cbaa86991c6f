"""Viral-load model for infected individuals.

Viral loads are drawn from a Gaussian mixture on log10 copies/mL and
exponentiated once at population generation; downstream PCR math works in
linear copies. Cycle-threshold (Ct) values convert to log10 viral load via an
affine calibration curve.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

# log10 VL = CT_INTERCEPT + CT_SLOPE * Ct
CT_INTERCEPT = 14.0 + np.log10(1.105)
CT_SLOPE = -0.681 / np.log(10.0)


@dataclass(frozen=True)
class GmmParams:
    """Gaussian mixture on log10 viral load (copies/mL) among infected individuals."""

    weights: tuple[float, ...]
    mus: tuple[float, ...]
    sigmas: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.weights) == len(self.mus) == len(self.sigmas)):
            raise ValueError("weights, mus, sigmas must have equal length")
        if len(self.weights) == 0:
            raise ValueError("mixture needs at least one component")
        if any(w < 0 for w in self.weights):
            raise ValueError("mixture weights must be non-negative")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1")
        if any(s <= 0 for s in self.sigmas):
            raise ValueError("mixture sigmas must be positive")

    def as_arrays(self):
        return (np.asarray(self.weights), np.asarray(self.mus), np.asarray(self.sigmas))

    def mean(self) -> float:
        """Analytic mixture mean of log10 viral load."""
        w, mu, _ = self.as_arrays()
        return float(np.dot(w, mu))

    def variance(self) -> float:
        """Analytic mixture variance of log10 viral load."""
        w, mu, sd = self.as_arrays()
        return float(np.dot(w, sd**2 + mu**2) - self.mean() ** 2)

    def cdf(self, x) -> np.ndarray:
        """Mixture CDF of log10 viral load, vectorized over x."""
        w, mu, sd = self.as_arrays()
        x = np.asarray(x, dtype=float)
        z = (x[..., None] - mu) / sd
        return ndtr(z) @ w


DEFAULT_GMM = GmmParams(
    weights=(0.33, 0.54, 0.13),
    mus=(8.09, 5.35, 3.75),
    sigmas=(1.06, 0.89, 0.39),
)


def ct_to_log10_viral_load(ct):
    """Convert a PCR cycle-threshold value to log10 viral load (copies/mL).

    Affine calibration; strictly decreasing in Ct.
    """
    ct = np.asarray(ct, dtype=float)
    if not np.all(np.isfinite(ct)):
        raise ValueError("ct must be finite")
    out = CT_INTERCEPT + CT_SLOPE * ct
    return float(out) if out.ndim == 0 else out


def sample_log10_viral_load(params: GmmParams, rng: np.random.Generator, size=None):
    """Draw log10 viral loads for infected individuals from the mixture."""
    w, mu, sd = params.as_arrays()
    comp = rng.choice(len(w), size=size, p=w)
    return rng.normal(mu[comp], sd[comp])


def sample_viral_load(params: GmmParams, rng: np.random.Generator, size=None):
    """Draw viral loads in linear copies/mL for infected individuals."""
    return 10.0 ** sample_log10_viral_load(params, rng, size=size)
