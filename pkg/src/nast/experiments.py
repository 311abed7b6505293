"""Monte Carlo harness for the simulation studies.

Four runners cover the standard study designs: null-distribution
sampling of T, size/power of the single test, sequential-estimate
accuracy, and the T profile across candidate counts.  Replicates are
embarrassingly parallel; every replicate's seed is derived by hashing
(base seed, cell index, replicate index), so serial and parallel runs
produce identical records.  Long-format records are the single source
of truth: summaries and CSV files are derived from them.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Optional, Sequence, Union

import numpy as np

from .model import GeneratorConfig, generate_msbm
from .rng import derive_seed
from .sequential import default_k_max, nast, normal_quantile, statistic_at_k0, test_at_k0

__all__ = [
    "ExperimentConfig",
    "ExperimentRecord",
    "ExperimentReport",
    "run_normality",
    "run_size_power",
    "run_accuracy",
    "run_t_profile",
    "run_experiment",
    "CSV_HEADER",
]

CSV_HEADER = "experiment,cell_id,K,n,L,rho,K0,replicate,quantity,value"

EXPERIMENT_KINDS = ("normality", "size_power", "accuracy", "t_profile")

# Desk-scale defaults keep a full run in minutes; the published study
# scale (n=1000, L=10, R=200) is reachable through the same knobs.
DESK_DEFAULTS = {"n": 400, "L": 5, "replicates": 100, "rho": 0.5}


def _as_tuple(value, caster) -> tuple:
    if value is None:
        return ()
    if isinstance(value, (list, tuple, np.ndarray)):
        return tuple(caster(v) for v in value)
    return (caster(value),)


@dataclass
class ExperimentConfig:
    """One study request: which design, which grid, how many replicates."""

    experiment: str
    n: Union[int, Sequence[int]] = DESK_DEFAULTS["n"]
    L: int = DESK_DEFAULTS["L"]
    K: Union[int, Sequence[int]] = (1, 2, 3)
    rho: Union[float, Sequence[float], None] = None
    replicates: int = DESK_DEFAULTS["replicates"]
    alpha: float = 0.05
    seed: int = 0
    k0_max: Optional[int] = None  # T-profile columns / sequential search bound
    workers: int = 1

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment {self.experiment!r}; expected {EXPERIMENT_KINDS}")
        self.n = _as_tuple(self.n, int)
        self.K = _as_tuple(self.K, int)
        self.rho = _as_tuple(self.rho, float)
        if not self.n or not self.K:
            raise ValueError("n and K grids must be nonempty")
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class ExperimentRecord:
    """One measured quantity for one replicate of one grid cell."""

    experiment: str
    cell_id: str
    K: int
    n: int
    L: int
    rho: Optional[float]
    K0: Optional[int]
    replicate: int
    quantity: str
    value: float

    def csv_row(self) -> str:
        rho = "" if self.rho is None else f"{self.rho:.17g}"
        k0 = "" if self.K0 is None else str(self.K0)
        return (
            f"{self.experiment},{self.cell_id},{self.K},{self.n},{self.L},"
            f"{rho},{k0},{self.replicate},{self.quantity},{self.value:.17g}"
        )


@dataclass
class ExperimentReport:
    """Long-format records plus aggregates recomputed from them."""

    config: ExperimentConfig
    records: list[ExperimentRecord] = field(default_factory=list)

    def to_csv(self, target: Union[str, IO[str]]) -> None:
        """UTF-8, LF line endings, 17-significant-digit floats."""
        if isinstance(target, str):
            with open(target, "w", encoding="utf-8", newline="\n") as fh:
                self.to_csv(fh)
            return
        target.write(CSV_HEADER + "\n")
        for rec in self.records:
            target.write(rec.csv_row() + "\n")

    def cell_values(self, cell_id: str, quantity: str) -> np.ndarray:
        return np.array(
            [r.value for r in self.records if r.cell_id == cell_id and r.quantity == quantity]
        )

    def summary(self) -> list[dict]:
        """Per-cell aggregates in record order of first appearance."""
        cells: dict[str, list[ExperimentRecord]] = {}
        for rec in self.records:
            cells.setdefault(rec.cell_id, []).append(rec)
        out = []
        for cell_id, recs in cells.items():
            vals = np.array([r.value for r in recs])
            first = recs[0]
            entry = {
                "cell_id": cell_id,
                "K": first.K,
                "n": first.n,
                "L": first.L,
                "rho": first.rho,
                "K0": first.K0,
                "quantity": first.quantity,
                "count": len(recs),
                "mean": float(vals.mean()),
            }
            if first.quantity == "T":
                entry["variance"] = float(vals.var(ddof=1)) if len(recs) > 1 else 0.0
                entry["ks_distance"] = _ks_distance_normal(vals)
            out.append(entry)
        return out


def _ks_distance_normal(sample: np.ndarray) -> float:
    """Kolmogorov-Smirnov distance to the standard normal."""
    x = np.sort(np.asarray(sample, dtype=np.float64))
    m = x.size
    cdf = np.array([0.5 * math.erfc(-v / math.sqrt(2.0)) for v in x])
    upper = np.abs(np.arange(1, m + 1) / m - cdf).max()
    lower = np.abs(cdf - np.arange(0, m) / m).max()
    return float(max(upper, lower))


def _gen(recipe: str, K: int, n: int, L: int, rho: Optional[float], seed: int):
    cfg = GeneratorConfig(n=n, L=L, K=K, connectivity=recipe, rho=rho, seed=seed)
    return generate_msbm(cfg)


# Module-level replicate tasks so process pools can pickle them.

def _task_normality(args) -> list[tuple]:
    cell_id, K, n, L, alpha, rep, rep_seed = args
    net, _ = _gen("exp1", K, n, L, None, rep_seed)
    outcome = test_at_k0(net, K, alpha, rep_seed)
    return [(cell_id, K, n, L, None, K, rep, "T", outcome.T)]


def _task_size_power(args) -> list[tuple]:
    cell_id, K0, K_true, n, L, rho, alpha, rep, rep_seed = args
    net, _ = _gen("exp2or3", K_true, n, L, rho, rep_seed)
    outcome = test_at_k0(net, K0, alpha, rep_seed)
    return [(cell_id, K_true, n, L, rho, K0, rep, "reject", float(outcome.reject))]


def _task_accuracy(args) -> list[tuple]:
    cell_id, K, n, L, rho, alpha, k_max, rep, rep_seed = args
    net, _ = _gen("exp2or3", K, n, L, rho, rep_seed)
    result = nast(net, alpha=alpha, k_max=k_max, seed=rep_seed)
    return [(cell_id, K, n, L, rho, None, rep, "correct", float(result.K_hat == K))]


def _task_t_profile(args) -> list[tuple]:
    K, n, L, rho, k0_max, rep, rep_seed = args
    net, _ = _gen("exp2or3", K, n, L, rho, rep_seed)
    rows = []
    for K0 in range(1, k0_max + 1):
        T, _ = statistic_at_k0(net, K0, rep_seed)
        rows.append((f"K={K},K0={K0}", K, n, L, rho, K0, rep, "T", T))
    return rows


def _run_tasks(task_fn, tasks: list, workers: int) -> list[list[tuple]]:
    if workers <= 1 or len(tasks) <= 1:
        return [task_fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task_fn, tasks, chunksize=max(1, len(tasks) // (workers * 8))))


def _assemble(cfg: ExperimentConfig, chunks: list[list[tuple]]) -> ExperimentReport:
    records = [
        ExperimentRecord(cfg.experiment, cell_id, K, n, L, rho, K0, rep, quantity, float(value))
        for chunk in chunks
        for (cell_id, K, n, L, rho, K0, rep, quantity, value) in chunk
    ]
    return ExperimentReport(config=cfg, records=records)


def run_normality(cfg: ExperimentConfig) -> ExperimentReport:
    """Sample T at K0 = K on heterogeneous dense networks; one cell per (K, n).

    Emits the raw per-replicate statistics (histogram binning is left to
    downstream tools); the summary carries mean, variance, and the KS
    distance to N(0, 1).
    """
    tasks = []
    for ci, (K, n) in enumerate((K, n) for K in cfg.K for n in cfg.n):
        cell_id = f"K={K},n={n}"
        for rep in range(cfg.replicates):
            tasks.append((cell_id, K, n, cfg.L, cfg.alpha, rep, derive_seed(cfg.seed, ci, rep)))
    return _assemble(cfg, _run_tasks(_task_normality, tasks, cfg.workers))


def run_size_power(cfg: ExperimentConfig) -> ExperimentReport:
    """Rejection rate under the null (K = K0) and one-step underfit (K = K0 + 1)."""
    rho = cfg.rho[0] if cfg.rho else DESK_DEFAULTS["rho"]
    n = cfg.n[0]
    tasks = []
    ci = 0
    for K0 in cfg.K:
        for regime, K_true in (("size", K0), ("power", K0 + 1)):
            cell_id = f"K0={K0},{regime}"
            for rep in range(cfg.replicates):
                tasks.append(
                    (cell_id, K0, K_true, n, cfg.L, rho, cfg.alpha, rep,
                     derive_seed(cfg.seed, ci, rep))
                )
            ci += 1
    return _assemble(cfg, _run_tasks(_task_size_power, tasks, cfg.workers))


def run_accuracy(cfg: ExperimentConfig) -> ExperimentReport:
    """Proportion of replicates where the sequential estimate hits the true K."""
    rhos = cfg.rho if cfg.rho else (0.1,)
    n = cfg.n[0]
    k_max = cfg.k0_max if cfg.k0_max is not None else default_k_max(n)
    tasks = []
    ci = 0
    for K in cfg.K:
        for rho in rhos:
            cell_id = f"K={K},rho={rho:g}"
            for rep in range(cfg.replicates):
                tasks.append(
                    (cell_id, K, n, cfg.L, rho, cfg.alpha, k_max, rep,
                     derive_seed(cfg.seed, ci, rep))
                )
            ci += 1
    return _assemble(cfg, _run_tasks(_task_accuracy, tasks, cfg.workers))


def run_t_profile(cfg: ExperimentConfig) -> ExperimentReport:
    """Mean T across candidate counts K0 = 1..k0_max for each true K.

    The same R networks are reused across the K0 columns of a row to
    reduce variance, so columns within a row are comparable.
    """
    rho = cfg.rho[0] if cfg.rho else 0.1
    n = cfg.n[0]
    k0_max = cfg.k0_max if cfg.k0_max is not None else 10
    tasks = []
    for ci, K in enumerate(cfg.K):
        for rep in range(cfg.replicates):
            tasks.append((K, n, cfg.L, rho, k0_max, rep, derive_seed(cfg.seed, ci, rep)))
    report = _assemble(cfg, _run_tasks(_task_t_profile, tasks, cfg.workers))
    return report


def t_profile_acceptance_flags(report: ExperimentReport) -> dict[int, Optional[int]]:
    """First K0 per true K whose mean T lies inside the acceptance band."""
    z = normal_quantile(1.0 - report.config.alpha / 2.0)
    rows: dict[int, dict[int, float]] = {}
    for entry in report.summary():
        rows.setdefault(entry["K"], {})[entry["K0"]] = entry["mean"]
    flags: dict[int, Optional[int]] = {}
    for K, by_k0 in rows.items():
        flags[K] = next((k0 for k0 in sorted(by_k0) if abs(by_k0[k0]) < z), None)
    return flags


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Dispatch to the runner named by ``cfg.experiment``."""
    runner = {
        "normality": run_normality,
        "size_power": run_size_power,
        "accuracy": run_accuracy,
        "t_profile": run_t_profile,
    }[cfg.experiment]
    return runner(cfg)
