"""Evaluation metrics for protocol outcomes.

Per replication, metrics are ratios of tallies pooled across all pools of that
replication (NOT means of per-pool ratios): sensitivity = D/S, efficiency =
N/(pooled + followup tests), gamma = D per test, eta = follow-up tests per
identified positive. Across replications the per-replication ratios are
averaged; replications where a ratio is undefined (no positives) are excluded
from that average and counted.
"""

from dataclasses import dataclass

import numpy as np

from .dorfman import ProtocolOutcome


@dataclass
class MetricsSummary:
    """Metrics of a single protocol run; None marks undefined ratios."""

    sensitivity: float | None
    efficiency: float
    gamma: float
    eta: float | None
    pooled_tests: int
    followup_tests: int
    total_S: int
    total_D: int
    N: int
    n: int


@dataclass
class ReplicationSummary:
    """Cross-replication averages of per-replication metrics."""

    sensitivity: float | None
    sensitivity_se: float | None
    efficiency: float
    efficiency_se: float
    gamma: float
    eta: float | None
    replications: int
    undefined_sensitivity: int
    undefined_eta: int

    @property
    def objective(self) -> float | None:
        if self.sensitivity is None:
            return None
        return self.sensitivity * self.efficiency


def compute_metrics(outcome: ProtocolOutcome) -> MetricsSummary:
    """Metrics of one protocol run from its pooled tallies."""
    S = outcome.total_S
    D = outcome.total_D
    tests = outcome.total_tests
    return MetricsSummary(
        sensitivity=(D / S) if S > 0 else None,
        efficiency=outcome.N / tests,
        gamma=D / tests,
        eta=(outcome.total_followup / D) if D > 0 else None,
        pooled_tests=outcome.pooled_tests,
        followup_tests=outcome.total_followup,
        total_S=S,
        total_D=D,
        N=outcome.N,
        n=outcome.n,
    )


def _mean_se(values: np.ndarray):
    if values.size == 0:
        return None, None
    mean = float(values.mean())
    se = float(values.std(ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
    return mean, se


def summarize_replications(S, D, pooled, followup, N) -> ReplicationSummary:
    """Average per-replication metrics over arrays of per-replication tallies."""
    S = np.asarray(S, dtype=float)
    D = np.asarray(D, dtype=float)
    pooled = np.asarray(pooled, dtype=float)
    followup = np.asarray(followup, dtype=float)
    tests = pooled + followup
    reps = S.size

    defined_s = S > 0
    sens, sens_se = _mean_se(D[defined_s] / S[defined_s])
    eff, eff_se = _mean_se(N / tests)
    gamma = float((D / tests).mean())
    defined_eta = D > 0
    eta, _ = _mean_se(followup[defined_eta] / D[defined_eta])
    return ReplicationSummary(
        sensitivity=sens,
        sensitivity_se=sens_se,
        efficiency=eff,
        efficiency_se=eff_se,
        gamma=gamma,
        eta=eta,
        replications=reps,
        undefined_sensitivity=int(reps - defined_s.sum()),
        undefined_eta=int(reps - defined_eta.sum()),
    )


def estimate_fpr(
    sensitivity: float,
    efficiency: float,
    n: int,
    alpha: float,
    per_test_fpr: float = 1e-4,
) -> float:
    """Estimated fraction of negative persons falsely declared positive.

    A negative person is falsely declared positive only if they receive an
    individual follow-up test and it misfires. The fraction of persons tested
    individually is 1/efficiency - 1/n; subtracting the (true-positive)
    fraction alpha * sensitivity leaves the negatives tested individually,
    floored at 0 against sampling noise.
    """
    frac_indiv = 1.0 / efficiency - 1.0 / n
    frac_neg_indiv = max(frac_indiv - alpha * sensitivity, 0.0)
    return per_test_fpr * frac_neg_indiv / (1.0 - alpha)
