"""Seeded Monte Carlo sweeps of estimator error against the MSE bounds.

A sweep is a grid of cells ``(d, eta, n, method)``.  For each ``d`` and
matrix index j a base chain is drawn from ``random_reversible`` on stream
``MATRIX_STREAM + d * 2**20 + j``; trial k on matrix j uses stream
``j * trials + k``.  Results therefore do not depend on scheduling, and the
worker count (``MARKOV_XACT_THREADS``, 0 = one per CPU) only changes speed.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .bounds import mle_mse_bound, sce_mse_bound
from .core import (
    as_distribution,
    joint_matrix,
    nu_over_mu_inf,
    point_mass,
    read_distribution,
    read_matrix,
    stationary_distribution,
)
from .errors import GapUnreachable, InvalidInput
from .estimators import MLE, SCE, mle_estimate, sce_estimate
from .sampling import MatrixOracle, RandomSource, adjust_gap, random_reversible, simulate_chain

log = logging.getLogger(__name__)

MATRIX_STREAM = 1 << 62
CSV_COLUMNS = ("method", "d", "eta", "n", "trials", "mse", "mse_stderr", "bound", "seed")


@dataclass
class ExperimentConfig:
    d_values: list[int]
    eta_values: list[float]
    n_values: list[int]
    trials: int
    base_seed: int = 0
    methods: list[str] = field(default_factory=lambda: [MLE, SCE])
    matrix_source: str = "random-reversible"
    initial: str = "stationary"
    matrices_per_cell: int = 1

    def __post_init__(self):
        for name in ("d_values", "eta_values", "n_values", "methods"):
            if not getattr(self, name):
                raise InvalidInput(f"{name} must be a nonempty list")
        if self.trials < 1 or self.matrices_per_cell < 1:
            raise InvalidInput("trials and matrices_per_cell must be >= 1")
        self.methods = [m.upper() for m in self.methods]
        unknown = set(self.methods) - {MLE, SCE}
        if unknown:
            raise InvalidInput(f"unknown methods {sorted(unknown)}")
        if any(not 0 < e < 1 for e in self.eta_values):
            raise InvalidInput("eta_values must lie in (0, 1)")
        if any(n < 1 for n in self.n_values) or any(d < 2 for d in self.d_values):
            raise InvalidInput("n_values must be >= 1 and d_values >= 2")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(raw) - known
        if extra:
            raise InvalidInput(f"unknown config keys {sorted(extra)}")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise InvalidInput(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidInput(f"{path}: {exc}") from None
        return cls.from_dict(raw)


@dataclass(frozen=True)
class MseRecord:
    method: str
    d: int
    eta: float
    n: int
    trials: int
    mse: float
    mse_stderr: float
    bound: float
    seed: int

    def row(self) -> list[str]:
        out = []
        for name in CSV_COLUMNS:
            value = getattr(self, name)
            out.append(f"{value:.12g}" if isinstance(value, float) else str(value))
        return out


@dataclass(frozen=True)
class RatioRecord:
    d: int
    eta: float
    n: int
    trials: int
    mse_mle: float
    mse_sce: float
    ratio: float
    ratio_stderr: float
    bound_ratio: float


def worker_count() -> int:
    raw = os.environ.get("MARKOV_XACT_THREADS", "0")
    try:
        k = int(raw)
    except ValueError:
        raise InvalidInput(f"MARKOV_XACT_THREADS={raw!r} is not an integer") from None
    return k if k > 0 else (os.cpu_count() or 1)


def _base_matrix(config: ExperimentConfig, d: int, j: int):
    if config.matrix_source == "random-reversible":
        return random_reversible(d, RandomSource(config.base_seed, MATRIX_STREAM + d * (1 << 20) + j))
    P = read_matrix(config.matrix_source)
    if P.dim != d:
        raise InvalidInput(f"{config.matrix_source} has dim {P.dim}, config asks for d={d}")
    return P


def _initial(config: ExperimentConfig, mu):
    how = config.initial
    if how == "stationary":
        return mu
    if how.startswith("point-mass:"):
        state = int(how.split(":", 1)[1])
        if not 0 <= state < mu.dim:
            raise InvalidInput(f"point-mass state {state} outside 0..{mu.dim - 1}")
        return point_mass(mu.dim, state)
    if how.startswith("file:"):
        return as_distribution(read_distribution(how.split(":", 1)[1]))
    raise InvalidInput(f"initial must be 'stationary', 'point-mass:<state>' or 'file:<path>', got {how!r}")


def squared_errors(P, mu, nu, method: str, n: int, trials: int, seed: int, stream0: int = 0) -> np.ndarray:
    """||estimate - D_mu P||_F^2 for ``trials`` independent runs (streams stream0 + k)."""
    oracle = MatrixOracle(P)
    target = joint_matrix(P, mu)
    out = np.empty(trials)
    for k in range(trials):
        rng = RandomSource(seed, stream0 + k)
        if method == MLE:
            est = mle_estimate(simulate_chain(oracle, nu, n, rng))
        else:
            est = sce_estimate(oracle, nu, n, rng)
        out[k] = np.sum((est.joint - target) ** 2)
    return out


def _cell_task(config: ExperimentConfig, d: int, eta: float, j: int):
    """Errors for every (n, method) on matrix j of dimension d, adjusted to gap eta."""
    base = _base_matrix(config, d, j)
    P = adjust_gap(base, stationary_distribution(base), eta)
    mu = stationary_distribution(P)
    nu = _initial(config, mu)
    ratio = nu_over_mu_inf(nu, mu)
    result = {}
    for n in config.n_values:
        for method in config.methods:
            errs = squared_errors(P, mu, nu, method, n, config.trials, config.base_seed, j * config.trials)
            if method == MLE:
                bound = mle_mse_bound(n, eta, eta=eta, nu_ratio=ratio)
            else:
                bound = sce_mse_bound(n, eta, nu_ratio=ratio)
            result[(n, method)] = (errs, bound)
    return result


def run_mse_experiment(config: ExperimentConfig, workers: int | None = None) -> list[MseRecord]:
    """Monte Carlo MSE of each method on every grid cell, with the matching bound."""
    tasks = [(d, eta, j) for d in config.d_values for eta in config.eta_values
             for j in range(config.matrices_per_cell)]
    workers = workers or worker_count()

    def run(task):
        try:
            return _cell_task(config, *task)
        except GapUnreachable as exc:
            log.warning("skipping d=%d eta=%g: %s", task[0], task[1], exc)
            return None

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]

    merged: dict = {}
    for (d, eta, _), res in zip(tasks, results):
        for n in config.n_values:
            for method in config.methods:
                slot = merged.setdefault((d, eta, n, method), [])
                slot.append(None if res is None else res[(n, method)])

    records = []
    for d in config.d_values:
        for eta in config.eta_values:
            for n in config.n_values:
                for method in config.methods:
                    parts = merged[(d, eta, n, method)]
                    if any(p is None for p in parts):
                        records.append(MseRecord(method, d, eta, n, config.trials, math.nan,
                                                 math.nan, math.nan, config.base_seed))
                        continue
                    errs = np.concatenate([p[0] for p in parts])
                    stderr = float(errs.std(ddof=1) / math.sqrt(errs.size)) if errs.size > 1 else 0.0
                    bound = float(np.mean([p[1] for p in parts]))
                    records.append(MseRecord(method, d, eta, n, config.trials, float(errs.mean()),
                                             stderr, bound, config.base_seed))
    return records


def ratio_summary(records: list[MseRecord]) -> list[RatioRecord]:
    """MSE_MLE / MSE_SCE per cell, with the delta-method standard error."""
    by_cell: dict = {}
    for r in records:
        by_cell.setdefault((r.d, r.eta, r.n), {})[r.method] = r
    out = []
    for (d, eta, n), pair in by_cell.items():
        if MLE not in pair or SCE not in pair:
            raise InvalidInput("ratio needs both MLE and SCE records")
        a, b = pair[MLE], pair[SCE]
        ratio = a.mse / b.mse
        rel = math.hypot(a.mse_stderr / a.mse, b.mse_stderr / b.mse)
        out.append(RatioRecord(d, eta, n, a.trials, a.mse, b.mse, ratio, ratio * rel,
                               (2 + eta) / (4 - eta)))
    return out


def run_ratio_experiment(config: ExperimentConfig, workers: int | None = None) -> list[RatioRecord]:
    if set(config.methods) != {MLE, SCE}:
        raise InvalidInput("ratio experiment needs methods MLE and SCE")
    return ratio_summary(run_mse_experiment(config, workers))


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(r.row())
    return buf.getvalue()


def ratio_to_csv(records: list[RatioRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = [f.name for f in fields(RatioRecord)]
    writer.writerow(names)
    for r in records:
        writer.writerow([f"{v:.12g}" if isinstance(v, float) else str(v) for v in asdict(r).values()])
    return buf.getvalue()


def linear_fit_r2(x, y) -> float:
    """Coefficient of determination of the least-squares line through (x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return float(1 - resid @ resid / np.sum((y - y.mean()) ** 2))
