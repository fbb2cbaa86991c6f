"""Scenario configuration, reproducible replication orchestration, and artifact output.

A scenario fixes the population model, the PCR model, the pool size, and the
replication count. Replication r draws every random quantity from streams
derived from (master_seed, r), so results are identical regardless of how
replications are scheduled across workers; both strategies of a replication
share one population draw, making cross-strategy comparisons paired.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .dorfman import run_dorfman
from .errors import ConfigError
from .metrics import ReplicationSummary, estimate_fpr, summarize_replications
from .pcr import PcrParams, PiecewiseSensitivity, RealisticSensitivity, StepSensitivity, calibrate_tau
from .pooling import assign_correlated, assign_naive
from .population import HOUSEHOLD_DISTS, HouseholdDist, generate_population
from .viral import DEFAULT_GMM, GmmParams

WORKERS_ENV = "CORRPOOL_WORKERS"

# sub-stream tags appended to (master_seed, replication)
_TAG_POPULATION = 0
_TAG_STRATEGY = {"naive": 1, "correlated": 2}
_TAG_CALIBRATION = 3

_STRATEGIES = ("naive", "correlated")


@dataclass
class ScenarioConfig:
    """Validated scenario parameters; build from a dict with from_dict."""

    alpha: float = 0.01
    q: float = 0.166
    household_dist: str | tuple[float, ...] = "US"
    pool_size: int = 6
    beta_bar: float | None = 0.05
    tau: int | None = None
    sensitivity_variant: dict = field(default_factory=lambda: {"variant": "realistic"})
    population_size: int = 12000
    replications: int = 2000
    master_seed: int = 0
    strategies: tuple[str, ...] = _STRATEGIES
    pad_last_pool: bool = False
    gmm: GmmParams = DEFAULT_GMM

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must be in (0, 1)")
        if not 0 <= self.q <= 1:
            raise ConfigError("q must be in [0, 1]")
        if self.pool_size < 1:
            raise ConfigError("pool_size must be at least 1")
        if self.population_size < 1:
            raise ConfigError("population_size must be at least 1")
        if self.replications < 1:
            raise ConfigError("replications must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        if self.tau is None and self.beta_bar is None:
            raise ConfigError("either tau or beta_bar must be given")
        if self.tau is not None and (self.tau != int(self.tau) or self.tau < 1):
            raise ConfigError("tau must be a positive integer")
        if self.beta_bar is not None and not 0 < self.beta_bar <= 0.5:
            raise ConfigError("beta_bar must be in (0, 0.5]")
        for s in self.strategies:
            if s not in _STRATEGIES:
                raise ConfigError(f"unknown strategy {s!r}")
        variant = self.sensitivity_variant.get("variant")
        if variant not in ("realistic", "step", "piecewise"):
            raise ConfigError("sensitivity_variant.variant must be realistic, step, or piecewise")
        if variant == "step" and "u0" not in self.sensitivity_variant:
            raise ConfigError("step sensitivity needs u0")
        if variant == "piecewise" and not {"theta1", "theta2"} <= set(self.sensitivity_variant):
            raise ConfigError("piecewise sensitivity needs theta1 and theta2")
        self.resolve_dist()  # validate early

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "household_dist" in kwargs and isinstance(kwargs["household_dist"], list):
            kwargs["household_dist"] = tuple(kwargs["household_dist"])
        if "strategies" in kwargs:
            kwargs["strategies"] = tuple(kwargs["strategies"])
        if "gmm" in kwargs and isinstance(kwargs["gmm"], dict):
            g = kwargs["gmm"]
            try:
                kwargs["gmm"] = GmmParams(
                    tuple(g["weights"]), tuple(g["mus"]), tuple(g["sigmas"])
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"invalid gmm parameters: {exc}") from exc
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def resolve_dist(self) -> HouseholdDist:
        if isinstance(self.household_dist, str):
            try:
                return HOUSEHOLD_DISTS[self.household_dist]
            except KeyError:
                raise ConfigError(
                    f"unknown household distribution {self.household_dist!r}; "
                    f"known: {sorted(HOUSEHOLD_DISTS)}"
                ) from None
        try:
            return HouseholdDist(tuple(self.household_dist))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def resolve_tau(self) -> int:
        """Explicit tau, or tau calibrated to beta_bar on a dedicated stream."""
        if self.tau is not None:
            return int(self.tau)
        rng = np.random.default_rng(np.random.SeedSequence((self.master_seed, _TAG_CALIBRATION)))
        return calibrate_tau(self.beta_bar, self.gmm, PcrParams(), rng)

    def resolve_sensitivity(self, tau: int):
        v = self.sensitivity_variant
        if v["variant"] == "realistic":
            return RealisticSensitivity(PcrParams(tau=tau))
        if v["variant"] == "step":
            return StepSensitivity(float(v["u0"]))
        return PiecewiseSensitivity(float(v["theta1"]), float(v["theta2"]))

    def echo(self, tau: int) -> dict:
        """Resolved configuration embedded in every output artifact."""
        return {
            "alpha": self.alpha,
            "q": self.q,
            "household_dist": (
                self.household_dist
                if isinstance(self.household_dist, str)
                else list(self.household_dist)
            ),
            "pool_size": self.pool_size,
            "beta_bar": self.beta_bar,
            "tau": tau,
            "sensitivity_variant": self.sensitivity_variant,
            "population_size": self.population_size,
            "replications": self.replications,
            "master_seed": self.master_seed,
            "strategies": list(self.strategies),
            "pad_last_pool": self.pad_last_pool,
        }


@dataclass
class StrategyTallies:
    """Per-replication raw tallies for one strategy, ordered by replication."""

    S: np.ndarray
    D: np.ndarray
    pooled: np.ndarray
    followup: np.ndarray

    def summarize(self, N: int) -> ReplicationSummary:
        return summarize_replications(self.S, self.D, self.pooled, self.followup, N)


def _replication_tallies(config: ScenarioConfig, tau: int, rep: int) -> dict[str, tuple]:
    """Run one replication of every configured strategy on a shared population."""
    dist = config.resolve_dist()
    sensitivity = config.resolve_sensitivity(tau)
    rng_pop = np.random.default_rng(
        np.random.SeedSequence((config.master_seed, rep, _TAG_POPULATION))
    )
    pop = generate_population(
        config.population_size, dist, config.alpha, config.q, config.gmm, rng_pop
    )
    out = {}
    for strategy in config.strategies:
        rng = np.random.default_rng(
            np.random.SeedSequence((config.master_seed, rep, _TAG_STRATEGY[strategy]))
        )
        if strategy == "naive":
            assignment = assign_naive(pop.size, config.pool_size, rng)
        else:
            assignment = assign_correlated(pop, config.pool_size, rng)
        outcome = run_dorfman(pop, assignment, sensitivity, rng, config.pad_last_pool)
        out[strategy] = (
            outcome.total_S,
            outcome.total_D,
            outcome.pooled_tests,
            outcome.total_followup,
        )
    return out


def _worker_chunk(config: ScenarioConfig, tau: int, reps: list[int]):
    return [(r, _replication_tallies(config, tau, r)) for r in reps]


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_replications(config: ScenarioConfig, tau: int | None = None) -> dict[str, StrategyTallies]:
    """Run all replications, in parallel when CORRPOOL_WORKERS > 1.

    Results are assembled in replication order, so output is identical for any
    worker count.
    """
    if tau is None:
        tau = config.resolve_tau()
    reps = list(range(config.replications))
    workers = worker_count()
    rows: list[tuple[int, dict]] = []
    if workers == 1 or len(reps) < 2 * workers:
        rows = _worker_chunk(config, tau, reps)
    else:
        chunks = [reps[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_worker_chunk, config, tau, chunk) for chunk in chunks]
            for fut in futures:
                rows.extend(fut.result())
    rows.sort(key=lambda item: item[0])

    out = {}
    for strategy in config.strategies:
        tallies = np.array([row[1][strategy] for row in rows], dtype=np.int64)
        out[strategy] = StrategyTallies(
            S=tallies[:, 0], D=tallies[:, 1], pooled=tallies[:, 2], followup=tallies[:, 3]
        )
    return out


@dataclass
class ScenarioResult:
    config_echo: dict
    tallies: dict[str, StrategyTallies]
    summaries: dict[str, ReplicationSummary]
    fpr: dict[str, float | None]

    def summary_dict(self) -> dict:
        out = {"config": self.config_echo, "strategies": {}}
        for strategy, s in self.summaries.items():
            out["strategies"][strategy] = {
                "sensitivity": s.sensitivity,
                "sensitivity_se": s.sensitivity_se,
                "efficiency": s.efficiency,
                "efficiency_se": s.efficiency_se,
                "gamma": s.gamma,
                "eta": s.eta,
                "objective": s.objective,
                "fpr_estimate": self.fpr[strategy],
                "replications": s.replications,
                "undefined_sensitivity": s.undefined_sensitivity,
                "undefined_eta": s.undefined_eta,
            }
        return out


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    """Run a scenario and summarize per-strategy metrics."""
    tau = config.resolve_tau()
    tallies = run_replications(config, tau)
    summaries = {s: t.summarize(config.population_size) for s, t in tallies.items()}
    fpr = {}
    for strategy, summary in summaries.items():
        if summary.sensitivity is None:
            fpr[strategy] = None
        else:
            fpr[strategy] = estimate_fpr(
                summary.sensitivity, summary.efficiency, config.pool_size, config.alpha
            )
    return ScenarioResult(config.echo(tau), tallies, summaries, fpr)


def run_sweep(config: ScenarioConfig, alphas, pool_sizes) -> list[dict]:
    """Run a grid of (alpha, pool size) scenarios; one row per strategy and cell."""
    alphas = list(alphas)
    pool_sizes = list(pool_sizes)
    if not alphas or not pool_sizes:
        raise ConfigError("sweep grid must be non-empty")
    rows = []
    for alpha in alphas:
        for n in pool_sizes:
            cell = replace(config, alpha=alpha, pool_size=n)
            result = run_scenario(cell)
            for strategy, s in result.summaries.items():
                rows.append(
                    {
                        "strategy": strategy,
                        "alpha": alpha,
                        "pool_size": n,
                        "sensitivity": s.sensitivity,
                        "sensitivity_se": s.sensitivity_se,
                        "efficiency": s.efficiency,
                        "efficiency_se": s.efficiency_se,
                    }
                )
    return rows


def format_number(x) -> str:
    """Serialize a number with 12 significant digits."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(format_number(obj))
    return obj


def write_summary_json(result_dict: dict, path: str):
    with open(path, "w", newline="") as fh:
        json.dump(_jsonify(result_dict), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(rows: list[dict], path: str):
    """RFC-4180 CSV with 12-significant-digit numbers."""
    if not rows:
        raise ValueError("no rows to write")
    fieldnames = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, quoting=csv.QUOTE_MINIMAL)
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {
                    k: format_number(v) if isinstance(v, (int, float, np.number)) else v
                    for k, v in row.items()
                }
            )


def replication_rows(config_echo: dict, tallies: dict[str, StrategyTallies]) -> list[dict]:
    rows = []
    for strategy, t in tallies.items():
        for r in range(t.S.size):
            rows.append(
                {
                    "replication": r,
                    "strategy": strategy,
                    "pool_size": config_echo["pool_size"],
                    "S_total": int(t.S[r]),
                    "D_total": int(t.D[r]),
                    "pooled_tests": int(t.pooled[r]),
                    "followup_tests": int(t.followup[r]),
                }
            )
    return rows
