"""Finite-n verification of the robustness/convergence-time bounds and the
scaling-law sweeps.

Asymptotic claims are rendered two ways: explicit-constant inequalities
validated instance by instance, and log-log fitted exponents over geometric
n-grids. The inequality constants (8 for the trace bound, 16 for the sigma1
upper bound, spread 2 for ratio constancy) are artifact choices frozen after
small-n validation; violations are reported, never suppressed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .convergence import MatrixPowerCache, convergence_time, projected_threshold_time
from .errors import ConsensusAlreadyReached, NonPositiveValue, UsageError
from .gramian import (
    DIRECT_CAP_DEFAULT,
    GramianReport,
    solve_lyapunov_direct,
    solve_lyapunov_series,
    symmetrized_walk,
)
from .projection import project, projector_pi, projector_uniform
from .stochastic import StochasticMatrix, invariant_distribution
from .topology import family_matrix

VAR0_FLOOR = 1e-14

# Explicit constants for the finite-n renderings of the trace and sigma1
# bounds; empirically validated on the small-n grid, then frozen.
TRACE_BOUND_CONST = 8.0
SIGMA_UPPER_CONST = 16.0
RATIO_SPREAD_LIMIT = 2.0

SWEEP_METRICS = ("trace_P", "sigma1_P", "t_half", "var0", "rho_QA")
SWEEP_COLUMNS = (
    "family",
    "n",
    "trace_P",
    "sigma1_P",
    "t_half",
    "var0",
    "rho_QA",
    "lower_ratio",
    "upper_ratio",
    "sigma_ratio",
)


def var0(A: StochasticMatrix) -> float:
    """Largest absolute deviation of any entry from its column mean; equals
    the max-absolute entry of QA.

    Raises
    ------
    ConsensusAlreadyReached
        When all rows are identical up to 1e-14 (the deviation vanishes).
    """
    deviations = A.entries - A.entries.mean(axis=0, keepdims=True)
    value = float(np.max(np.abs(deviations)))
    if value <= VAR0_FLOOR:
        raise ConsensusAlreadyReached(value)
    return value


@dataclass(frozen=True, eq=False)
class BoundsCheck:
    """All quantities entering the trace/sigma1 sandwich for one network,
    with the three explicit-constant inequality outcomes.

    lower_ratio = (trace_P/n - 1) / (var0 * t_half)   (bounded by 8)
    upper_ratio = (sigma1_P - 1) * n / t_half          (diagnostic)
    sigma_ratio = sigma1_P / t_half                    (ratio-constancy)
    """

    n: int
    var0: float
    trace_P: float
    sigma1_P: float
    t_half: int
    pi_ratio: float
    lower_ratio: float
    upper_ratio: float
    sigma_ratio: float
    t_quarter_proj: int
    trace_upper_ok: bool
    sigma_upper_ok: bool
    sigma_lower_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.trace_upper_ok and self.sigma_upper_ok and self.sigma_lower_ok


def _gramian_auto(A: StochasticMatrix, direct_cap: int, tol: float) -> GramianReport:
    proj = projector_uniform(A.n)
    M = project(A, proj)
    if A.n <= direct_cap:
        return solve_lyapunov_direct(M, cap=direct_cap)
    return solve_lyapunov_series(M, tol=tol)


def verify_theorem_bounds(
    A: StochasticMatrix,
    direct_cap: int = DIRECT_CAP_DEFAULT,
    tol: float = 1e-10,
) -> BoundsCheck:
    """Run the full pipeline on one network and evaluate the finite-n
    sandwich:

    - trace_P/n <= 1 + 8 * var0 * t_half
    - sigma1_P  <= 1 + 16 * (pi_max/pi_min) * t_half
    - sigma1_P  >= 1 + t_quarter/(4n), t_quarter the first k with
      ||Q A^k||_inf <= 1/4
    """
    v0 = var0(A)
    pi = invariant_distribution(A)
    pi_ratio = float(np.max(pi.pi) / np.min(pi.pi))
    cache = MatrixPowerCache(A, 0)
    t_half = convergence_time(A, 0.5, cache=cache).t
    t_quarter = projected_threshold_time(A, 0.25, cache=cache)
    report = _gramian_auto(A, direct_cap, tol)
    trace_P, sigma1_P = report.trace, report.sigma1
    n = A.n
    trace_upper_ok = trace_P / n <= 1.0 + TRACE_BOUND_CONST * v0 * t_half
    sigma_upper_ok = sigma1_P <= 1.0 + SIGMA_UPPER_CONST * pi_ratio * t_half
    sigma_lower_ok = sigma1_P >= 1.0 + t_quarter / (4.0 * n)
    return BoundsCheck(
        n=n,
        var0=v0,
        trace_P=trace_P,
        sigma1_P=sigma1_P,
        t_half=t_half,
        pi_ratio=pi_ratio,
        lower_ratio=(trace_P / n - 1.0) / (v0 * t_half),
        upper_ratio=(sigma1_P - 1.0) * n / t_half,
        sigma_ratio=sigma1_P / t_half,
        t_quarter_proj=t_quarter,
        trace_upper_ok=trace_upper_ok,
        sigma_upper_ok=sigma_upper_ok,
        sigma_lower_ok=sigma_lower_ok,
    )


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    r_squared: float


def fit_exponent(ns, values) -> ExponentFit:
    """Ordinary least squares of log(value) on log(n).

    Raises
    ------
    NonPositiveValue, UsageError (< 3 points)
    """
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if ns.shape != values.shape or ns.ndim != 1:
        raise UsageError("ns and values must be 1-d arrays of equal length")
    if ns.size < 3:
        raise UsageError(f"log-log fit requires >= 3 points, got {ns.size}")
    for i, v in enumerate(values):
        if not (v > 0.0) or not np.isfinite(v):
            raise NonPositiveValue(i, v)
    x = np.log(ns)
    y = np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ExponentFit(slope=float(slope), intercept=float(intercept), r_squared=r_squared)


@dataclass(frozen=True, eq=False)
class RatioConstancy:
    """sigma1(P(QA)) / t(1/2) per grid point and its max/min spread."""

    family: str
    points: tuple[tuple[int, float], ...]
    spread: float

    @property
    def constant_ok(self) -> bool:
        return self.spread <= RATIO_SPREAD_LIMIT


def _per_n_seed(seed: int, n: int) -> int:
    # Distinct deterministic stream per grid point of a random family.
    return seed * 1000003 + n


def ratio_constancy(family, ns, p=None, seed=0, tol=1e-10) -> RatioConstancy:
    """Track the sigma1/t(1/2) ratio along an n-grid for a named family."""
    points = []
    for n in ns:
        A = family_matrix(family, n, p=p, seed=_per_n_seed(seed, n))
        report = _gramian_auto(A, DIRECT_CAP_DEFAULT, tol)
        t_half = convergence_time(A, 0.5).t
        points.append((int(n), report.sigma1 / t_half))
    ratios = [r for _, r in points]
    return RatioConstancy(
        family=str(family),
        points=tuple(points),
        spread=max(ratios) / min(ratios),
    )


@dataclass(frozen=True)
class SweepRow:
    n: int
    trace_P: float
    sigma1_P: float
    t_half: int
    var0: float
    rho_QA: float
    lower_ratio: float
    upper_ratio: float
    sigma_ratio: float


@dataclass(frozen=True, eq=False)
class ScalingSweep:
    """Per-n robustness metrics for one topology family with fitted log-log
    exponents. Failed grid points are carried in ``failures``."""

    family: str
    ns: tuple[int, ...]
    rows: tuple[SweepRow, ...]
    fits: dict
    failures: dict


def _sweep_row(family, n, p, seed, direct_cap, tol) -> SweepRow:
    A = family_matrix(family, n, p=p, seed=_per_n_seed(seed, n))
    check = verify_theorem_bounds(A, direct_cap=direct_cap, tol=tol)
    rho = project(A, projector_uniform(n)).spectral_radius
    return SweepRow(
        n=int(n),
        trace_P=check.trace_P,
        sigma1_P=check.sigma1_P,
        t_half=check.t_half,
        var0=check.var0,
        rho_QA=rho,
        lower_ratio=check.lower_ratio,
        upper_ratio=check.upper_ratio,
        sigma_ratio=check.sigma_ratio,
    )


def sweep(
    family,
    ns,
    p=None,
    seed=0,
    jobs: int = 1,
    direct_cap: int = DIRECT_CAP_DEFAULT,
    tol: float = 1e-10,
) -> ScalingSweep:
    """Evaluate a family over a strictly increasing n-grid (>= 3 points) and
    fit log-log exponents for every metric. Grid points are independent and
    may be evaluated concurrently; aggregation is ordered by n."""
    ns = [int(n) for n in ns]
    if len(ns) < 3:
        raise UsageError(f"sweep requires >= 3 grid points, got {len(ns)}")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise UsageError("sweep grid must be strictly increasing")
    rows_by_n = {}
    failures = {}

    def run(n):
        return _sweep_row(family, n, p, seed, direct_cap, tol)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = {n: pool.submit(run, n) for n in ns}
            for n in ns:
                try:
                    rows_by_n[n] = futures[n].result()
                except Exception as exc:  # noqa: BLE001 - partial results contract
                    failures[n] = f"{type(exc).__name__}: {exc}"
    else:
        for n in ns:
            try:
                rows_by_n[n] = run(n)
            except Exception as exc:  # noqa: BLE001
                failures[n] = f"{type(exc).__name__}: {exc}"
    rows = tuple(rows_by_n[n] for n in ns if n in rows_by_n)
    fits = {}
    if len(rows) >= 3:
        good_ns = [row.n for row in rows]
        for metric in SWEEP_METRICS:
            values = [getattr(row, metric) for row in rows]
            try:
                fits[metric] = fit_exponent(good_ns, values)
            except NonPositiveValue:
                continue
    return ScalingSweep(
        family=str(family), ns=tuple(ns), rows=rows, fits=fits, failures=failures
    )


def sweep_to_csv(result: ScalingSweep) -> str:
    """Render a sweep as the repo-wide CSV schema: fixed header, 12
    significant digits, fit summary appended as '#'-prefixed footer lines.
    Pure function of the sweep, so identical configs give identical bytes."""
    lines = [",".join(SWEEP_COLUMNS)]
    for row in result.rows:
        lines.append(
            ",".join(
                [
                    result.family,
                    str(row.n),
                    f"{row.trace_P:.12g}",
                    f"{row.sigma1_P:.12g}",
                    str(row.t_half),
                    f"{row.var0:.12g}",
                    f"{row.rho_QA:.12g}",
                    f"{row.lower_ratio:.12g}",
                    f"{row.upper_ratio:.12g}",
                    f"{row.sigma_ratio:.12g}",
                ]
            )
        )
    for n in result.ns:
        if n in result.failures:
            lines.append(f"# failed n={n}: {result.failures[n]}")
    for metric in SWEEP_METRICS:
        if metric in result.fits:
            fit = result.fits[metric]
            lines.append(
                f"# fit {metric} slope={fit.slope:.12g} "
                f"intercept={fit.intercept:.12g} r_squared={fit.r_squared:.12g}"
            )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class FlockingCheck:
    """Per-network outcomes of the flocking robustness checks."""

    n: int
    lambda2: float
    lambda2_bound: float
    lambda2_ok: bool
    sigma1: float
    sigma1_over_n2: float
    t_half: int
    tightness_ratio: float  # n * sigma1 / t_half


def flocking_bounds_check(A: StochasticMatrix, tol: float = 1e-10) -> FlockingCheck:
    """Evaluate lambda2(S) against 1 - 1/n, the sigma1/n^2 headroom, and the
    tightness ratio n*sigma1/t(1/2) for a flocking network."""
    _, lambda2 = symmetrized_walk(A)
    n = A.n
    report = _gramian_auto(A, DIRECT_CAP_DEFAULT, tol)
    t_half = convergence_time(A, 0.5).t
    bound = 1.0 - 1.0 / n
    return FlockingCheck(
        n=n,
        lambda2=lambda2,
        lambda2_bound=bound,
        lambda2_ok=lambda2 <= bound,
        sigma1=report.sigma1,
        sigma1_over_n2=report.sigma1 / n**2,
        t_half=t_half,
        tightness_ratio=n * report.sigma1 / t_half,
    )


@dataclass(frozen=True)
class PiTraceComparison:
    """Gramian traces under the uniform and pi-weighted projections; the
    pi-weighted trace dominates (column means are the Frobenius-optimal
    rank-one row shift)."""

    trace_uniform: float
    trace_pi: float
    slack: float
    ok: bool


def pi_projection_comparison(A: StochasticMatrix, tol: float = 1e-10) -> PiTraceComparison:
    """Compare trace(P(Q_pi A)) >= trace(P(QA)), both via the series solver,
    with relative slack 1e-8."""
    pi = invariant_distribution(A)
    trace_q = solve_lyapunov_series(project(A, projector_uniform(A.n)), tol=tol).trace
    trace_qpi = solve_lyapunov_series(project(A, projector_pi(pi)), tol=tol).trace
    slack = 1e-8 * trace_q
    return PiTraceComparison(
        trace_uniform=trace_q,
        trace_pi=trace_qpi,
        slack=slack,
        ok=trace_qpi >= trace_q - slack,
    )
