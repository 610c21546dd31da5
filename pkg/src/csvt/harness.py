"""Seeded Monte Carlo experiments over parameter grids.

Each replication gets its own random stream derived from
``(master_seed, point_index, rep_index)``, and results are reduced in index
order, so a run is reproducible whatever the thread count.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import synth
from .estimator import csvt

log = logging.getLogger(__name__)

EXPERIMENTS = (
    "exp1_sample_rich",
    "exp1_high_dim",
    "exp1_balanced",
    "exp2_k_growth",
    "exp3_imbalance",
    "exp4_gamma",
    "exp5_hetero",
    "custom",
)

COLUMNS = (
    "experiment", "n", "p", "K", "beta", "gamma", "eta_max", "reps",
    "accuracy", "mean_wall_time", "histogram", "error",
)


@dataclass(frozen=True)
class GridPoint:
    n: int
    p: int
    K: int
    beta: float
    gamma: float = 1.0
    eta_max: float | None = None  # None means unit noise

    def scaled(self, scale: float) -> "GridPoint":
        if scale == 1.0:
            return self
        return replace(self, n=max(1, round(self.n * scale)), p=max(1, round(self.p * scale)))

    @property
    def feasible(self) -> bool:
        return 1 <= self.K <= min(self.p, self.n)


@dataclass
class ExperimentConfig:
    experiment: str
    grid: list[GridPoint]
    reps: int = 100
    master_seed: int = 0
    scale: float = 1.0
    threads: int = 1
    strategy: str = "auto"
    tn: str | float = "log"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not 0 < self.scale <= 1:
            raise ValueError("scale must lie in (0, 1]")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def points(self) -> list[GridPoint]:
        return [pt.scaled(self.scale) for pt in self.grid]


@dataclass
class SummaryRow:
    experiment: str
    n: int
    p: int
    K: int
    beta: float
    gamma: float
    eta_max: float | None
    reps: int
    accuracy: float
    mean_wall_time: float
    histogram: dict[int, int] = field(default_factory=dict)
    error: str | None = None

    @property
    def point(self) -> GridPoint:
        return GridPoint(self.n, self.p, self.K, self.beta, self.gamma, self.eta_max)


def _steps(lo: float, hi: float, step: float) -> list[float]:
    count = int(round((hi - lo) / step)) + 1
    return [round(lo + i * step, 10) for i in range(count)]


def full_grid(experiment: str) -> list[GridPoint]:
    """Full-size grids with 10^5 to 10^7 samples per point."""
    M = 10**6
    if experiment == "exp1_sample_rich":
        return [GridPoint(k * M, 100, 99, 0.1) for k in range(1, 11)]
    if experiment == "exp1_high_dim":
        return [GridPoint(100, k * M, 10, 1.0) for k in range(1, 11)]
    if experiment == "exp1_balanced":
        return [GridPoint(m, m, m // 100, 0.1) for m in range(1000, 10001, 1000)]
    ks = [1] + list(range(10, 101, 10))
    if experiment == "exp2_k_growth":
        return [GridPoint(M, 100, k, 0.1) for k in ks] + [GridPoint(100, M, k, 1.0) for k in ks]
    if experiment == "exp3_imbalance":
        return [GridPoint(M, 200, 50, b) for b in _steps(0.001, 0.01, 0.001)]
    if experiment == "exp4_gamma":
        gs = _steps(0.1, 1.0, 0.1)
        return ([GridPoint(10**5, 200, 200, 0.01, g) for g in gs]
                + [GridPoint(200, 10**5, 10, 0.5, g) for g in gs])
    if experiment == "exp5_hetero":
        es = _steps(0.1, 1.5, 0.1)
        return ([GridPoint(M, 200, 200, 0.01, 1.0, e) for e in es]
                + [GridPoint(200, M, 10, 0.5, 1.0, e) for e in es])
    raise ValueError(f"no full-scale grid for {experiment!r}")


def desk_grid(experiment: str) -> list[GridPoint]:
    """Workstation-sized grids (at most 10^5 samples, 10^4 dimensions)."""
    if experiment == "exp1_sample_rich":
        return [GridPoint(10**4, 100, 50, 0.1)]
    if experiment == "exp1_high_dim":
        return [GridPoint(100, 10**4, 10, 1.0)]
    if experiment == "exp1_balanced":
        return [GridPoint(2000, 2000, 20, 0.1)]
    if experiment == "exp2_k_growth":
        return [GridPoint(2000, 100, k, 0.1) for k in [1] + list(range(10, 101, 10))]
    if experiment == "exp3_imbalance":
        return [GridPoint(10**5, 200, 50, b) for b in _steps(0.001, 0.01, 0.001)]
    if experiment == "exp4_gamma":
        return [GridPoint(10**4, 200, 50, 0.1, g) for g in _steps(0.1, 1.0, 0.1)]
    if experiment == "exp5_hetero":
        return [GridPoint(10**4, 200, 50, 0.1, 1.0, e) for e in _steps(0.1, 1.5, 0.1)]
    raise ValueError(f"no desk grid for {experiment!r}")


def replicate(point: GridPoint, rng, strategy: str = "auto", tn="log") -> tuple[int, float]:
    """One draw at ``point``: returns ``(k_hat, estimator wall time)``."""
    design = synth.make_design(point.n, point.p, point.K, point.beta, rng, gamma=point.gamma, tn=tn)
    noise = synth.UNIT_NOISE if point.eta_max is None else synth.NoiseModel.heteroscedastic(point.eta_max)
    X, _ = synth.sample_dataset(design, noise, rng)
    report = csvt(X, tn, strategy)
    return report.k_hat, report.wall_time


def _error_row(cfg: ExperimentConfig, pt: GridPoint, msg: str) -> SummaryRow:
    return SummaryRow(cfg.experiment, pt.n, pt.p, pt.K, pt.beta, pt.gamma, pt.eta_max,
                      cfg.reps, math.nan, math.nan, {}, msg)


def run_point(cfg: ExperimentConfig, index: int, pt: GridPoint, pool=None) -> SummaryRow:
    if not pt.feasible:
        return _error_row(cfg, pt, f"infeasible: K={pt.K} > min(p, n)={min(pt.p, pt.n)}")

    def one(rep: int):
        return replicate(pt, synth.replication_rng(cfg.master_seed, index, rep), cfg.strategy, cfg.tn)

    try:
        results = list(pool.map(one, range(cfg.reps)) if pool else map(one, range(cfg.reps)))
    except Exception as exc:  # any failed replication voids the whole point
        log.warning("grid point %s failed: %s", pt, exc)
        return _error_row(cfg, pt, f"{type(exc).__name__}: {exc}")
    k_hats = [k for k, _ in results]
    hist = dict(sorted(Counter(k_hats).items()))
    return SummaryRow(
        cfg.experiment, pt.n, pt.p, pt.K, pt.beta, pt.gamma, pt.eta_max, cfg.reps,
        hist.get(pt.K, 0) / cfg.reps,
        float(np.mean([w for _, w in results])),
        hist,
    )


def run_experiment(cfg: ExperimentConfig) -> list[SummaryRow]:
    """Accuracy and mean estimator time for each grid point."""
    rows = []
    pool = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else None
    try:
        for i, pt in enumerate(cfg.points()):
            row = run_point(cfg, i, pt, pool)
            log.info("%s n=%d p=%d K=%d beta=%g gamma=%g eta_max=%s accuracy=%s",
                     cfg.experiment, pt.n, pt.p, pt.K, pt.beta, pt.gamma, pt.eta_max, row.accuracy)
            rows.append(row)
    finally:
        if pool is not None:
            pool.shutdown()
    return rows


# ---------------------------------------------------------------------------
# persistence

def _row_record(row: SummaryRow) -> dict:
    return {
        "experiment": row.experiment,
        "n": row.n,
        "p": row.p,
        "K": row.K,
        "beta": row.beta,
        "gamma": row.gamma,
        "eta_max": row.eta_max,
        "reps": row.reps,
        "accuracy": row.accuracy,
        "mean_wall_time": row.mean_wall_time,
        "histogram": json.dumps({str(k): v for k, v in row.histogram.items()}),
        "error": row.error,
    }


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_results(rows, path, format: str = "csv") -> None:
    """Write summary rows, one per grid point, with a fixed column order."""
    path = Path(path)
    records = [_row_record(r) for r in rows]
    if format == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, delimiter=",", lineterminator="\n")
            writer.writerow(COLUMNS)
            for rec in records:
                writer.writerow([_fmt(rec[c]) for c in COLUMNS])
    elif format == "json":
        # NaN is written as null
        for rec in records:
            for key in ("accuracy", "mean_wall_time"):
                if isinstance(rec[key], float) and math.isnan(rec[key]):
                    rec[key] = None
        path.write_text(json.dumps(records, indent=1) + "\n")
    else:
        raise ValueError(f"unknown format {format!r}")


def _opt_float(text):
    if text is None or text == "":
        return None
    return float(text)


def _from_record(rec: dict) -> SummaryRow:
    hist = rec["histogram"]
    if isinstance(hist, str):
        hist = json.loads(hist)
    acc = rec["accuracy"]
    wall = rec["mean_wall_time"]
    return SummaryRow(
        experiment=rec["experiment"],
        n=int(rec["n"]),
        p=int(rec["p"]),
        K=int(rec["K"]),
        beta=float(rec["beta"]),
        gamma=float(rec["gamma"]),
        eta_max=_opt_float(rec["eta_max"]),
        reps=int(rec["reps"]),
        accuracy=math.nan if acc in (None, "") else float(acc),
        mean_wall_time=math.nan if wall in (None, "") else float(wall),
        histogram={int(k): int(v) for k, v in hist.items()},
        error=rec.get("error") or None,
    )


def read_results(path, format: str = "csv") -> list[SummaryRow]:
    path = Path(path)
    if format == "csv":
        with path.open(newline="") as fh:
            return [_from_record(rec) for rec in csv.DictReader(fh)]
    if format == "json":
        return [_from_record(rec) for rec in json.loads(path.read_text())]
    raise ValueError(f"unknown format {format!r}")
