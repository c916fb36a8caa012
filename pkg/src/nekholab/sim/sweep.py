"""
Epsilon sweeps of the stability time and the fit of its exponent.

Each (epsilon, seed) row integrates one orbit from seeded random phases
until the drift reaches rho or the horizon passes. Rows are independent and
are returned in (epsilon, seed) order whatever the pool schedule. The
exponent a of T ~ exp(c eps^-a) is the slope of ln ln T against ln(1/eps).
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..certify.certificate import content_digest
from ..core.hamiltonian import SystemSpec
from ..core.resonance import DetectorConfig
from ..errors import DomainError, NekholabError
from ..utils.logger import get_logger
from .integrator import IntegratorConfig, State
from .trajectory import initial_phases, measure_stability

POOR_FIT_RMS = 1e-2
MIN_FIT_POINTS = 3


class RowStatus(Enum):
    OK = "ok"
    FAILED = "failed"


@dataclass
class SweepRow:
    """One (epsilon, seed) stability-time measurement."""

    epsilon: float
    seed: int
    T: float
    censored: bool
    max_drift: float
    crossings: int
    status: RowStatus = RowStatus.OK
    error_message: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "seed": self.seed,
            "T": self.T,
            "censored": self.censored,
            "max_drift": self.max_drift,
            "crossings": self.crossings,
            "status": self.status.value,
            "error_message": self.error_message,
        }


@dataclass
class EpsilonSummary:
    """Median over the seeds of one epsilon; censored if the median is."""

    epsilon: float
    median_T: float
    censored: bool
    median_drift: float
    rows_ok: int
    rows_failed: int
    rows_censored: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "median_T": self.median_T,
            "censored": self.censored,
            "median_drift": self.median_drift,
            "rows_ok": self.rows_ok,
            "rows_failed": self.rows_failed,
            "rows_censored": self.rows_censored,
        }


@dataclass
class FitResult:
    """Least-squares fit ln ln T = a ln(1/eps) + b."""

    a_estimate: float
    intercept: float
    residual: float
    points_used: int
    curvature: float
    poor_fit: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a_estimate": self.a_estimate,
            "intercept": self.intercept,
            "residual": self.residual,
            "points_used": self.points_used,
            "curvature": self.curvature,
            "poor_fit": self.poor_fit,
        }


@dataclass
class SweepResult:
    rows: List[SweepRow]
    summaries: List[EpsilonSummary]
    rho: float
    T_max: float
    fit: Optional[FitResult] = None
    fit_note: Optional[str] = None

    @property
    def failed_rows(self) -> int:
        return sum(1 for r in self.rows if r.status is RowStatus.FAILED)

    @property
    def censored_rows(self) -> int:
        return sum(1 for r in self.rows if r.status is RowStatus.OK and r.censored)

    def summary(self) -> Dict[str, Any]:
        return {
            "rho": self.rho,
            "T_max": self.T_max,
            "rows": len(self.rows),
            "failed_rows": self.failed_rows,
            "censored_rows": self.censored_rows,
            "per_epsilon": [s.to_dict() for s in self.summaries],
            "fit": self.fit.to_dict() if self.fit else None,
            "fit_note": self.fit_note,
        }

    def digest(self) -> str:
        return content_digest({
            "rows": [r.to_dict() for r in self.rows],
            "summary": self.summary(),
        })


def validate_eps_grid(eps_list: Sequence[float]) -> List[float]:
    """
    Raises:
        DomainError: unless the grid is non-empty, positive and strictly decreasing
    """
    grid = [float(e) for e in eps_list]
    if not grid:
        raise DomainError("Epsilon grid is empty")
    if any(not e > 0 for e in grid):
        raise DomainError("Epsilon values must be positive")
    if len(set(grid)) != len(grid):
        raise DomainError("Epsilon grid has duplicate values")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise DomainError("Epsilon grid must be strictly decreasing")
    return grid


def _run_row(task: Tuple[SystemSpec, float, int, float, float, IntegratorConfig,
                         Optional[DetectorConfig], Tuple[float, ...]]) -> SweepRow:
    spec_template, eps, seed, rho, T_max, cfg, detector, actions = task
    try:
        spec = spec_template.with_epsilon(eps)
        state0 = State.from_arrays(initial_phases(spec.n, seed), actions)
        record = measure_stability(spec, state0, rho, T_max, cfg, detector)
        T = record.stop_time if record.stop_time is not None else T_max
        return SweepRow(eps, seed, T, record.censored, record.max_drift, len(record.events))
    except (NekholabError, ValueError, ArithmeticError) as e:
        return SweepRow(eps, seed, math.nan, False, math.nan, 0,
                        status=RowStatus.FAILED, error_message=str(e))


def summarize(rows: Sequence[SweepRow], eps_list: Sequence[float],
              T_max: float) -> List[EpsilonSummary]:
    summaries = []
    for eps in eps_list:
        group = [r for r in rows if r.epsilon == eps]
        ok = [r for r in group if r.status is RowStatus.OK]
        if ok:
            median_T = float(np.median([r.T for r in ok]))
            median_drift = float(np.median([r.max_drift for r in ok]))
        else:
            median_T = median_drift = math.nan
        summaries.append(EpsilonSummary(
            epsilon=eps,
            median_T=median_T,
            censored=bool(ok) and median_T >= T_max,
            median_drift=median_drift,
            rows_ok=len(ok),
            rows_failed=len(group) - len(ok),
            rows_censored=sum(1 for r in ok if r.censored),
        ))
    return summaries


def fit_exponent(result: SweepResult) -> FitResult:
    """
    Slope of ln ln T against ln(1/eps) over non-censored summaries with T > 1.

    residual is the RMS of the linear fit; curvature is the quadratic
    coefficient of a second-order fit, and poor_fit flags an RMS above
    POOR_FIT_RMS.

    Raises:
        DomainError: with fewer than three eligible points or constant T
    """
    points = [
        (math.log(1.0 / s.epsilon), math.log(math.log(s.median_T)))
        for s in result.summaries
        if not s.censored and s.rows_ok > 0 and s.median_T > 1.0
    ]
    if len(points) < MIN_FIT_POINTS:
        raise DomainError(
            f"Fit needs at least {MIN_FIT_POINTS} non-censored points with T > 1, "
            f"got {len(points)}"
        )
    x = np.array([p[0] for p in points])
    y = np.array([p[1] for p in points])
    if np.ptp(y) == 0.0:
        raise DomainError("Stability time is constant over the grid; ln ln T is degenerate")

    slope, intercept = np.polyfit(x, y, 1)
    rms = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    curvature = float(np.polyfit(x, y, 2)[0])
    fit = FitResult(
        a_estimate=float(slope),
        intercept=float(intercept),
        residual=rms,
        points_used=len(points),
        curvature=curvature,
        poor_fit=rms > POOR_FIT_RMS,
    )
    get_logger().info("Exponent fit", a=fit.a_estimate, rms=rms, points=len(points),
                      poor_fit=fit.poor_fit)
    return fit


def _attach_fit(result: SweepResult) -> SweepResult:
    try:
        result.fit = fit_exponent(result)
    except DomainError as e:
        result.fit = None
        result.fit_note = str(e)
    return result


def sweep(spec_template: SystemSpec,
          eps_list: Sequence[float],
          rho: float,
          T_max: float,
          cfg: IntegratorConfig,
          seeds: Sequence[int],
          workers: int = 1,
          detector: Optional[DetectorConfig] = None,
          actions: Optional[Sequence[float]] = None) -> SweepResult:
    """
    Stability times over an epsilon grid and a set of seeds.

    Args:
        spec_template: System whose epsilon is replaced per row
        eps_list: Strictly decreasing positive grid
        rho: Drift threshold, 0 < rho < R/2
        T_max: Horizon; rows reaching it are censored
        cfg: Integrator configuration
        seeds: Seeds of the initial phases
        workers: Process count; 1 runs in-process
        detector: Optional resonance detector counting crossings per row
        actions: Initial actions (default: those of the template)

    Returns:
        SweepResult: Rows ordered by (epsilon, seed), per-epsilon medians and
            the exponent fit when at least three points are eligible
    """
    grid = validate_eps_grid(eps_list)
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise DomainError("Sweep needs at least one seed")
    if len(set(seeds)) != len(seeds):
        raise DomainError("Sweep seeds must be distinct")
    if not 0 < rho < spec_template.R / 2:
        raise DomainError(f"rho must satisfy 0 < rho < R/2 = {spec_template.R / 2}")
    if not T_max > 0:
        raise DomainError(f"T_max must be positive, got {T_max}")
    if workers < 1:
        raise DomainError(f"workers must be positive, got {workers}")

    I0 = tuple(float(x) for x in (actions if actions is not None
                                  else spec_template.default_actions()))
    tasks = [(spec_template, eps, seed, rho, T_max, cfg, detector, I0)
             for eps in grid for seed in seeds]

    logger = get_logger()
    logger.log_run_start("sweep", rows=len(tasks), workers=workers, rho=rho, T_max=T_max)

    if workers == 1 or len(tasks) == 1:
        rows = [_run_row(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_row, tasks))

    for row in rows:
        if row.status is RowStatus.FAILED:
            logger.error("Sweep row failed", eps=row.epsilon, seed=row.seed,
                         error=row.error_message)

    result = SweepResult(rows=rows, summaries=summarize(rows, grid, T_max), rho=rho,
                         T_max=T_max)
    return _attach_fit(result)


def synthetic_sweep(a: float,
                    eps_list: Optional[Sequence[float]] = None,
                    T_max: float = math.inf,
                    c: float = 1.0) -> SweepResult:
    """
    Analytic table T(eps) = exp(c eps^-a), bypassing integration.

    Rows at or beyond T_max are marked censored.
    """
    if not a > 0:
        raise DomainError(f"Synthetic exponent must be positive, got {a}")
    grid = validate_eps_grid(eps_list if eps_list is not None
                             else np.logspace(-1, -4, 7).tolist())
    rows = []
    for eps in grid:
        log_T = c * eps ** (-a)
        T = math.exp(log_T) if log_T < 700 else math.inf
        censored = T >= T_max
        rows.append(SweepRow(eps, 0, min(T, T_max), censored, 0.0, 0))
    result = SweepResult(rows=rows, summaries=summarize(rows, grid, T_max),
                         rho=math.nan, T_max=T_max)
    return _attach_fit(result)


def parse_synthetic(text: str) -> float:
    """Parse the 'a=0.25' form of a synthetic-table request."""
    key, sep, value = text.partition("=")
    if not sep or key.strip() != "a":
        raise DomainError(f"Synthetic spec must look like 'a=0.25', got {text!r}")
    try:
        return float(value)
    except ValueError:
        raise DomainError(f"Synthetic exponent is not a number: {value!r}") from None
