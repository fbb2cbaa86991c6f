"""PCR sensitivity models.

Three variants of the per-test sensitivity function p(v):

- realistic: a physical chain where the machine counts template copies from a
  subsample. The pooled sample holds K = round(sample_volume * sum of member
  loads) copies; each copy independently makes it into the amplified subsample
  with probability p = binding_efficiency * subsample_volume / sample_volume
  (the subsample shrinks to 1/pool_size of its individual-test volume, which is
  how dilution enters); the test is positive iff the count reaches the
  detection threshold tau.
- step: deterministic threshold on viral load, p(v) = 1{v >= u0}.
- piecewise: a piecewise-constant function used by the exact counterexample
  analysis: 0 at v=0, theta1 on (0,2), theta2 on [2,3), 1 on [3,inf).

All variants satisfy p(0) = 0 (no intrinsic false positives) and are monotone
non-decreasing in v. The module also calibrates tau so that the mean
individual-test false-negative rate over infected loads hits a target.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .viral import GmmParams, sample_viral_load

_SURE_POSITIVE = 1.0 - 1e-12
# Exact binomial sampling below this mean count; Poisson approximation above.
_EXACT_MEAN_COUNT = 1e4


@dataclass(frozen=True)
class PcrParams:
    """Physical parameters of the realistic PCR chain.

    Volumes: sample_volume_ml is per-person sample volume in mL;
    subsample_volume_ul is the amplified subsample in microliters for an
    individual test (a pool of size n subsamples subsample_volume_ul / n).
    """

    sample_volume_ml: float = 1.0
    subsample_volume_ul: float = 100.0
    binding_efficiency: float = 0.5
    tau: int = 175

    def __post_init__(self):
        if self.sample_volume_ml <= 0:
            raise ValueError("sample_volume_ml must be positive")
        if not 0 < self.subsample_volume_ul <= 1000.0 * self.sample_volume_ml:
            raise ValueError("subsample volume must be positive and at most the sample volume")
        if not 0 < self.binding_efficiency <= 1:
            raise ValueError("binding_efficiency must be in (0, 1]")
        if self.tau != int(self.tau) or self.tau < 1:
            raise ValueError("tau must be a positive integer")

    def capture_probability(self, pool_size=1):
        """Per-copy probability of entering the amplified subsample of a pooled test."""
        base = self.binding_efficiency * self.subsample_volume_ul / (1000.0 * self.sample_volume_ml)
        return base / np.asarray(pool_size, dtype=float)


def binomial_tail(counts, p, tau):
    """P(Binomial(K, p) >= tau), vectorized over K and p; 0 where K < tau."""
    K = np.asarray(counts, dtype=float)
    p = np.broadcast_to(np.asarray(p, dtype=float), K.shape)
    out = np.zeros_like(K)
    m = K >= tau
    # regularized incomplete beta: P(Binom(K,p) >= tau) = I_p(tau, K - tau + 1)
    out[m] = betainc(float(tau), K[m] - tau + 1.0, p[m])
    return out


def success_probability(total_load, pool_size, params: PcrParams):
    """Analytic probability that a pooled test on the given total load is positive.

    total_load is the sum of member viral loads in copies/mL; pool_size may be
    a scalar or an array matched to total_load.
    """
    total_load = np.asarray(total_load, dtype=float)
    if np.any(total_load < 0):
        raise ValueError("viral loads must be non-negative")
    K = np.rint(total_load * params.sample_volume_ml)
    p = params.capture_probability(pool_size)
    out = binomial_tail(K, p, params.tau)
    return float(out) if out.ndim == 0 else out


def draw_positive(total_load, pool_size, params: PcrParams, rng: np.random.Generator):
    """Sample pooled-test outcomes for an array of total loads.

    Counts with mean K*p up to 1e4 are drawn from the exact binomial; larger
    means use a Poisson approximation, except that loads whose analytic tail
    exceeds 1 - 1e-12 are declared positive outright.
    """
    total_load = np.atleast_1d(np.asarray(total_load, dtype=float))
    if np.any(total_load < 0):
        raise ValueError("viral loads must be non-negative")
    K = np.rint(total_load * params.sample_volume_ml)
    p = np.broadcast_to(np.asarray(params.capture_probability(pool_size)), K.shape)
    tail = binomial_tail(K, p, params.tau)

    out = tail > _SURE_POSITIVE
    mean_count = K * p
    undecided = ~out & (K >= params.tau)
    small = undecided & (mean_count <= _EXACT_MEAN_COUNT)
    if np.any(small):
        m = rng.binomial(K[small].astype(np.int64), p[small])
        out[small] = m >= params.tau
    large = undecided & (mean_count > _EXACT_MEAN_COUNT)
    if np.any(large):
        m = rng.poisson(mean_count[large])
        out[large] = m >= params.tau
    return out


def run_pooled_pcr(viral_loads, pool_size, params: PcrParams, rng: np.random.Generator) -> bool:
    """Run one pooled PCR test on the given member viral loads (copies/mL)."""
    loads = np.asarray(viral_loads, dtype=float)
    if pool_size < 1:
        raise ValueError("pool_size must be at least 1")
    if np.any(loads < 0):
        raise ValueError("viral loads must be non-negative")
    total = loads.sum()
    if total == 0.0:
        return False
    return bool(draw_positive(total, pool_size, params, rng)[0])


@dataclass(frozen=True)
class RealisticSensitivity:
    """Realistic binomial-subsampling sensitivity; dilution emerges from the
    shrinking subsample volume, so pooled tests pass the raw total load."""

    params: PcrParams = PcrParams()

    def success_probability(self, total_load, pool_size=1):
        return success_probability(total_load, pool_size, self.params)

    def draw(self, total_load, pool_size, rng):
        return draw_positive(total_load, pool_size, self.params, rng)


@dataclass(frozen=True)
class StepSensitivity:
    """Deterministic threshold sensitivity: p(v) = 1 when v >= u0 (and v > 0)."""

    u0: float

    def __post_init__(self):
        if self.u0 < 0:
            raise ValueError("u0 must be non-negative")

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        if np.any(v < 0):
            raise ValueError("viral loads must be non-negative")
        out = np.where((v >= self.u0) & (v > 0), 1.0, 0.0)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PiecewiseSensitivity:
    """Piecewise-constant sensitivity: 0 at 0, theta1 on (0,2), theta2 on [2,3), 1 on [3,inf)."""

    theta1: float
    theta2: float

    def __post_init__(self):
        if not 0 < self.theta1 < self.theta2 < 1:
            raise ValueError("need 0 < theta1 < theta2 < 1")

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        if np.any(v < 0):
            raise ValueError("viral loads must be non-negative")
        out = np.select(
            [v == 0, v < 2, v < 3],
            [0.0, self.theta1, self.theta2],
            default=1.0,
        )
        return float(out) if out.ndim == 0 else out


def evaluate_sensitivity(fn, v):
    """Evaluate a step or piecewise sensitivity function at load v >= 0."""
    return fn(v)


def calibrate_tau(
    target_beta_bar: float,
    gmm: GmmParams,
    params: PcrParams | None = None,
    rng: np.random.Generator | None = None,
    draws: int = 10**6,
    tau_max: int = 10**7,
) -> int:
    """Smallest integer tau whose estimated individual-test FNR reaches the target.

    The FNR estimate beta_bar(tau) = mean of 1 - P(positive | V) over `draws`
    infected viral loads is computed on one common set of draws for every tau
    candidate, making the curve monotone in the realized sample so a binary
    search is exact and the result deterministic given the rng seed.
    """
    if not 0 < target_beta_bar <= 0.5:
        raise ValueError("target_beta_bar must be in (0, 0.5]")
    if draws < 10**5:
        raise ValueError("calibration needs at least 1e5 draws")
    if params is None:
        params = PcrParams()
    if rng is None:
        rng = np.random.default_rng(0)

    loads = sample_viral_load(gmm, rng, size=draws)
    K = np.rint(loads * params.sample_volume_ml)
    p = float(params.capture_probability(1))

    def beta_bar(tau):
        return 1.0 - binomial_tail(K, p, tau).mean()

    lo, hi = 1, tau_max
    if beta_bar(hi) < target_beta_bar:
        raise ValueError(f"target FNR {target_beta_bar} unreachable with tau <= {tau_max}")
    if beta_bar(lo) >= target_beta_bar:
        return lo
    # invariant: beta_bar(lo) < target <= beta_bar(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if beta_bar(mid) >= target_beta_bar:
            hi = mid
        else:
            lo = mid
    return hi
