"""Parameter sweeps, exponent grids, and cross-family comparison runs.

All runners evaluate independent (kernel, split) points, so they parallelize
with joblib when ``n_jobs`` is not 1. Results come back in plan order no
matter how many workers ran, and a failed point carries its error message
instead of aborting the whole run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .datasets import SplitDataset
from .errors import EmptySweepError
from .kernels import DegreeKernel, Kernel, resolve_kernel
from .metrics import MetricsReport, evaluate_kernel

__all__ = [
    "SweepPlan", "SweepPoint", "run_sweep", "find_optimal",
    "GridPlan", "GridResult", "run_grid",
    "ComparisonRow", "ComparisonReport", "compare_algorithms",
    "DEFAULT_SWEEPS",
]

# Default parameter windows per family: start, stop, step.
DEFAULT_SWEEPS = {
    "bd": (0.0, 1.5, 0.01),
    "bhc": (0.0, 1.5, 0.01),
    "hhp": (0.0, 1.0, 0.01),
    "pd": (-1.0, 0.0, 0.01),
}


def _value_grid(start: float, stop: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    if stop < start:
        raise ValueError(f"empty range [{start}, {stop}]")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


@dataclass(frozen=True)
class SweepPlan:
    """One-parameter sweep of a kernel family."""

    family: str
    start: float
    stop: float
    step: float
    length: int = 20

    def __post_init__(self):
        if self.family not in DEFAULT_SWEEPS:
            valid = ", ".join(sorted(DEFAULT_SWEEPS))
            raise ValueError(f"unknown sweep family {self.family!r}; valid: {valid}")
        _value_grid(self.start, self.stop, self.step)  # validates range

    @classmethod
    def default(cls, family: str, length: int = 20) -> "SweepPlan":
        start, stop, step = DEFAULT_SWEEPS[family]
        return cls(family=family, start=start, stop=stop, step=step, length=length)

    def values(self) -> np.ndarray:
        return _value_grid(self.start, self.stop, self.step)


@dataclass(frozen=True)
class SweepPoint:
    parameter: float
    report: MetricsReport | None
    error: str | None = None


def _evaluate_point(ds: SplitDataset, kernel, length: int):
    # Kernel construction happens inside the guard so that an out-of-domain
    # parameter becomes a failed point, not an aborted run.
    try:
        if isinstance(kernel, tuple):
            kernel = resolve_kernel(*kernel)
        return evaluate_kernel(ds, kernel, length).report, None
    except ValueError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _evaluate_many(ds: SplitDataset, kernels, length: int, n_jobs: int):
    if n_jobs == 1:
        return [_evaluate_point(ds, k, length) for k in kernels]
    return Parallel(n_jobs=n_jobs)(
        delayed(_evaluate_point)(ds, k, length) for k in kernels)


def run_sweep(ds: SplitDataset, plan: SweepPlan, n_jobs: int = 1) -> list:
    """Evaluate every parameter value of ``plan``; failures stay in place."""
    values = plan.values()
    kernels = [(plan.family, float(v)) for v in values]
    outcomes = _evaluate_many(ds, kernels, plan.length, n_jobs)
    return [SweepPoint(parameter=float(v), report=rep, error=err)
            for v, (rep, err) in zip(values, outcomes)]


def find_optimal(points) -> SweepPoint:
    """Point with the lowest ranking score; ties go to the smaller parameter."""
    best = None
    for point in points:
        if point.report is None:
            continue
        if best is None or point.report.ranking_score < best.report.ranking_score:
            best = point
    if best is None:
        raise EmptySweepError("sweep produced no successful evaluation")
    return best


@dataclass(frozen=True)
class GridPlan:
    """Two-exponent grid over the degree-normalized kernel family."""

    a_start: float
    a_stop: float
    a_step: float
    b_start: float
    b_stop: float
    b_step: float
    length: int = 20

    @classmethod
    def square(cls, start: float, stop: float, step: float, length: int = 20) -> "GridPlan":
        return cls(a_start=start, a_stop=stop, a_step=step,
                   b_start=start, b_stop=stop, b_step=step, length=length)

    def a_values(self) -> np.ndarray:
        return _value_grid(self.a_start, self.a_stop, self.a_step)

    def b_values(self) -> np.ndarray:
        return _value_grid(self.b_start, self.b_stop, self.b_step)


@dataclass(frozen=True, eq=False)
class GridResult:
    a_values: np.ndarray
    b_values: np.ndarray
    scores: np.ndarray  # ranking score, NaN where evaluation failed
    reports: dict       # (i, j) -> MetricsReport
    errors: dict        # (i, j) -> str

    def argmin(self):
        """(a, b, score) of the best cell; row-major first wins ties."""
        if not self.reports:
            raise EmptySweepError("grid produced no successful evaluation")
        flat = np.where(np.isnan(self.scores), np.inf, self.scores)
        i, j = np.unravel_index(int(np.argmin(flat)), flat.shape)
        return float(self.a_values[i]), float(self.b_values[j]), float(self.scores[i, j])

    def diagonal_best(self):
        """Best cell with equal exponents, or None when the grid has no diagonal."""
        best = None
        for i, a in enumerate(self.a_values):
            for j, b in enumerate(self.b_values):
                if abs(a - b) > 1e-9 or np.isnan(self.scores[i, j]):
                    continue
                if best is None or self.scores[i, j] < best[2]:
                    best = (float(a), float(b), float(self.scores[i, j]))
        return best

    def near_optimal(self, rel_tol: float = 0.01) -> list:
        """Cells whose score is within ``rel_tol`` relative of the minimum."""
        _, _, lowest = self.argmin()
        cells = []
        for i, a in enumerate(self.a_values):
            for j, b in enumerate(self.b_values):
                s = self.scores[i, j]
                if not np.isnan(s) and s <= lowest * (1.0 + rel_tol):
                    cells.append((float(a), float(b), float(s)))
        return cells


def run_grid(ds: SplitDataset, plan: GridPlan, n_jobs: int = 1) -> GridResult:
    """Evaluate the full exponent grid of ``plan``.

    Restricting the grid to its diagonal reproduces a balanced-kernel sweep
    exactly; both paths build the same kernels from the same value grid.
    """
    a_values = plan.a_values()
    b_values = plan.b_values()
    cells = [(i, j) for i in range(a_values.size) for j in range(b_values.size)]
    kernels = [DegreeKernel(target_exp=float(a_values[i]), source_exp=float(b_values[j]))
               for i, j in cells]
    outcomes = _evaluate_many(ds, kernels, plan.length, n_jobs)

    scores = np.full((a_values.size, b_values.size), np.nan)
    reports: dict = {}
    errors: dict = {}
    for (i, j), (rep, err) in zip(cells, outcomes):
        if rep is not None:
            scores[i, j] = rep.ranking_score
            reports[i, j] = rep
        else:
            errors[i, j] = err
    return GridResult(a_values=a_values, b_values=b_values,
                      scores=scores, reports=reports, errors=errors)


@dataclass(frozen=True)
class ComparisonRow:
    family: str
    parameter: float | None
    report: MetricsReport


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple
    length: int

    def best(self, metric: str = "ranking_score") -> ComparisonRow:
        """Row with the best value of ``metric`` (lowest for ranking score)."""
        lower_is_better = metric == "ranking_score"
        chosen = None
        for row in self.rows:
            value = getattr(row.report, metric)
            if chosen is None:
                chosen = (row, value)
                continue
            if (value < chosen[1]) if lower_is_better else (value > chosen[1]):
                chosen = (row, value)
        if chosen is None:
            raise EmptySweepError("comparison has no rows")
        return chosen[0]


def compare_algorithms(ds: SplitDataset, families=("hhp", "bhc", "pd", "bd"),
                       length: int = 20, n_jobs: int = 1,
                       sweeps: dict | None = None) -> ComparisonReport:
    """Tune each family on ``ds`` and report its optimum.

    Parametric families run their default sweep (or the plan supplied in
    ``sweeps``); ``md`` and ``hc`` evaluate directly. Every family is tuned
    on the same split with the same list length, so rows are comparable.
    """
    rows = []
    for family in families:
        if family in ("md", "hc"):
            report, err = _evaluate_point(ds, resolve_kernel(family), length)
            if report is None:
                raise EmptySweepError(f"{family}: {err}")
            rows.append(ComparisonRow(family=family, parameter=None, report=report))
            continue
        plan = (sweeps or {}).get(family) or SweepPlan.default(family, length=length)
        best = find_optimal(run_sweep(ds, plan, n_jobs=n_jobs))
        rows.append(ComparisonRow(family=family, parameter=best.parameter,
                                  report=best.report))
    return ComparisonReport(rows=tuple(rows), length=length)
