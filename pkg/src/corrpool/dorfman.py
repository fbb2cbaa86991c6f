"""Two-stage (Dorfman) pooled testing protocol.

Each pool gets one pooled test; every member of a positive pool gets an
individual follow-up test. Follow-up tests reuse each person's viral load (no
resampling), and pooled and individual outcomes are conditionally independent
given the loads. A positive is identified iff their pool tests positive and
their individual test is positive.
"""

from dataclasses import dataclass

import numpy as np

from .pcr import RealisticSensitivity
from .pooling import PoolingAssignment
from .population import Population


@dataclass
class ProtocolOutcome:
    """Per-pool tallies of one protocol run.

    s_count[j]: infected members of pool j; pool_positive[j]: pooled-test
    outcome; individual_positive_count[j]: members whose individual test would
    be positive; detected[j]: positives identified (0 unless the pool is
    positive); followup_tests[j]: individual tests consumed.
    """

    s_count: np.ndarray
    pool_positive: np.ndarray
    individual_positive_count: np.ndarray
    detected: np.ndarray
    followup_tests: np.ndarray
    N: int
    n: int

    @property
    def pooled_tests(self) -> int:
        return self.s_count.size

    @property
    def total_S(self) -> int:
        return int(self.s_count.sum())

    @property
    def total_D(self) -> int:
        return int(self.detected.sum())

    @property
    def total_followup(self) -> int:
        return int(self.followup_tests.sum())

    @property
    def total_tests(self) -> int:
        return self.pooled_tests + self.total_followup


def run_dorfman(
    population: Population,
    assignment: PoolingAssignment,
    sensitivity,
    rng: np.random.Generator,
    pad_last_pool: bool = False,
) -> ProtocolOutcome:
    """Run the two-stage protocol over an assignment and tally outcomes.

    `sensitivity` is a RealisticSensitivity (dilution via the subsample volume,
    driven by each pool's actual size, or its nominal size when pad_last_pool)
    or a callable step/piecewise sensitivity applied to the pool's mean load.
    """
    V = population.viral_load
    if V.size != assignment.pool_of.size:
        raise ValueError("population and assignment sizes do not match")
    pool_of = assignment.pool_of
    P = assignment.num_pools
    n = assignment.n

    pool_size = np.bincount(pool_of, minlength=P)
    pool_load = np.bincount(pool_of, weights=V, minlength=P)
    s_count = np.bincount(pool_of, weights=population.infected.astype(float), minlength=P).astype(
        np.int64
    )

    dilution = np.full(P, n) if pad_last_pool else pool_size
    if isinstance(sensitivity, RealisticSensitivity):
        pool_positive = sensitivity.draw(pool_load, dilution, rng)
    else:
        p_pool = sensitivity(pool_load / dilution)
        pool_positive = rng.random(P) < p_pool

    # individual outcomes: only infected persons can test positive (p(0) = 0)
    w = np.zeros(V.size, dtype=bool)
    inf_idx = np.flatnonzero(population.infected)
    if inf_idx.size:
        if isinstance(sensitivity, RealisticSensitivity):
            p_ind = sensitivity.success_probability(V[inf_idx], 1)
        else:
            p_ind = sensitivity(V[inf_idx])
        w[inf_idx] = rng.random(inf_idx.size) < p_ind

    individual_positive_count = np.bincount(pool_of, weights=w.astype(float), minlength=P).astype(
        np.int64
    )
    detected = np.where(pool_positive, individual_positive_count, 0)
    followup = np.where(pool_positive, pool_size, 0)
    return ProtocolOutcome(
        s_count=s_count,
        pool_positive=pool_positive,
        individual_positive_count=individual_positive_count,
        detected=detected,
        followup_tests=followup,
        N=V.size,
        n=n,
    )
