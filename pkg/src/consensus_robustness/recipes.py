"""Reproduction recipes: every headline claim rendered as an explicit
finite-n check with pinned tolerances.

Each recipe returns a list of CheckResult records. The CLI ``verify``
command prints them; the acceptance test suite asserts them. Tolerances are
frozen here and nowhere else.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import analysis, convergence, gramian, projection, stochastic, topology
from .errors import ConsensusNetworkError

DEFAULT_SCALING_NS = (16, 32, 64, 128)
DEFAULT_GRID_NS = (8, 16, 32, 64)

# Edge probabilities for the random flocking instances, chosen dense enough
# that sampled graphs are well connected at each n.
FLOCKING_P = {8: 0.6, 16: 0.4, 32: 0.3, 64: 0.25}
FLOCKING_GRID_SEED = 7

GRID_FAMILIES = (
    "lazy-star",
    "lazy-cycle",
    "lazy-path",
    "lazy-directed-cycle",
    "lazy-complete",
    "mixing-example",
    "flocking-random",
)
DOUBLY_STOCHASTIC_FAMILIES = ("lazy-cycle", "lazy-complete", "mixing-example")

COMMUTATION_KS = (1, 2, 5, 16, 64)


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.name} {self.detail}"


def grid_matrix(family: str, n: int) -> stochastic.StochasticMatrix:
    """Canonical test-grid instance of a family (fixed flocking seeds)."""
    if family == "flocking-random":
        return topology.family_matrix(
            family, n, p=FLOCKING_P.get(n, 0.3), seed=FLOCKING_GRID_SEED + n
        )
    return topology.family_matrix(family, n)


def full_grid(ns=DEFAULT_GRID_NS):
    """(family, n, matrix) triples of the canonical topology grid."""
    return [(family, n, grid_matrix(family, n)) for family in GRID_FAMILIES for n in ns]


def _fit_metric(rows, metric, ns):
    values = [getattr(row, metric) for row in rows]
    return analysis.fit_exponent(ns, values)


def scaling_lazy_cycle(ns=DEFAULT_SCALING_NS) -> list[CheckResult]:
    """Gramian scaling of the lazy cycle: fitted trace and sigma1 exponents."""
    start = time.perf_counter()
    result = analysis.sweep("lazy-cycle", ns)
    elapsed = time.perf_counter() - start
    trace_fit = result.fits["trace_P"]
    sigma_fit = result.fits["sigma1_P"]
    return [
        CheckResult(
            "lazy-cycle trace slope = 3.0 +- 0.2",
            abs(trace_fit.slope - 3.0) <= 0.2,
            {"slope": trace_fit.slope, "r_squared": trace_fit.r_squared},
        ),
        CheckResult(
            "lazy-cycle sigma1 slope = 2.0 +- 0.15",
            abs(sigma_fit.slope - 2.0) <= 0.15,
            {"slope": sigma_fit.slope, "r_squared": sigma_fit.r_squared},
        ),
        CheckResult(
            "lazy-cycle fits r^2 >= 0.99",
            trace_fit.r_squared >= 0.99 and sigma_fit.r_squared >= 0.99,
            {"trace_r2": trace_fit.r_squared, "sigma1_r2": sigma_fit.r_squared},
        ),
        CheckResult(
            "lazy-cycle sweep runtime <= 300 s",
            elapsed <= 300.0,
            {"seconds": round(elapsed, 2)},
        ),
    ]


def scaling_lazy_star(ns=DEFAULT_SCALING_NS) -> list[CheckResult]:
    """Gramian scaling of the lazy star: linear trace, bounded sigma1."""
    start = time.perf_counter()
    result = analysis.sweep("lazy-star", ns)
    elapsed = time.perf_counter() - start
    trace_fit = result.fits["trace_P"]
    sigma_window_ok = all(1.0 <= row.sigma1_P <= 4.0 / 3.0 + 0.05 for row in result.rows)
    return [
        CheckResult(
            "lazy-star trace slope = 1.0 +- 0.1",
            abs(trace_fit.slope - 1.0) <= 0.1,
            {"slope": trace_fit.slope, "r_squared": trace_fit.r_squared},
        ),
        CheckResult(
            "lazy-star sigma1 in [1, 4/3 + 0.05] at every n",
            sigma_window_ok,
            {"sigma1": [row.sigma1_P for row in result.rows]},
        ),
        CheckResult(
            "lazy-star sweep runtime <= 120 s",
            elapsed <= 120.0,
            {"seconds": round(elapsed, 2)},
        ),
    ]


def convergence_scaling(ns=DEFAULT_SCALING_NS) -> list[CheckResult]:
    """Convergence-time exponents: quadratic for the cycle, flat for the star."""
    cycle_ts = [convergence.convergence_time(grid_matrix("lazy-cycle", n), 0.5).t for n in ns]
    star_ts = [convergence.convergence_time(grid_matrix("lazy-star", n), 0.5).t for n in ns]
    cycle_fit = analysis.fit_exponent(ns, cycle_ts)
    star_fit = analysis.fit_exponent(ns, star_ts)
    return [
        CheckResult(
            "lazy-cycle t(1/2) slope = 2.0 +- 0.2",
            abs(cycle_fit.slope - 2.0) <= 0.2,
            {"slope": cycle_fit.slope, "t": cycle_ts},
        ),
        CheckResult(
            "lazy-star t(1/2) slope = 0.0 +- 0.15",
            abs(star_fit.slope) <= 0.15,
            {"slope": star_fit.slope, "t": star_ts},
        ),
    ]


def circulant_spectrum(ns=DEFAULT_GRID_NS) -> list[CheckResult]:
    """Spectral radius of the projected lazy cycle equals cos^2(pi/n)."""
    out = []
    for n in ns:
        A = grid_matrix("lazy-cycle", n)
        rho = projection.project(A, projection.projector_uniform(n)).spectral_radius
        expected = math.cos(math.pi / n) ** 2
        out.append(
            CheckResult(
                f"rho(Q C_{n}^L) = cos^2(pi/{n}) to 1e-9",
                abs(rho - expected) <= 1e-9,
                {"rho": rho, "expected": expected},
            )
        )
    return out


def mixing_example_times(ns=DEFAULT_GRID_NS) -> list[CheckResult]:
    """Boundary and e^-1 convergence times of the rank-one mixing family,
    plus the closed-form distance curve."""
    out = []
    for n in ns:
        A = topology.mixing_example(n)
        alpha = 1.0 - 1.0 / (n - 1)
        cache = stochastic.MatrixPowerCache(A, 0)
        t_boundary = convergence.convergence_time(A, 2.0 - 4.0 / n + 1e-9, cache=cache).t
        out.append(
            CheckResult(
                f"B_{n}: t(2 - 4/n + 1e-9) = 1",
                t_boundary == 1,
                {"t": t_boundary},
            )
        )
        t_e = convergence.convergence_time(A, math.exp(-1.0), cache=cache).t
        out.append(
            CheckResult(
                f"B_{n}: t(e^-1) in [n-1, 2(n-1)]",
                n - 1 <= t_e <= 2 * (n - 1),
                {"t": t_e, "range": [n - 1, 2 * (n - 1)]},
            )
        )
        pi = stochastic.invariant_distribution(A)
        worst = 0.0
        for k in range(0, 65):
            measured = convergence.distance_to_consensus(A, k, pi)
            closed = 2.0 * alpha**k * (1.0 - 1.0 / n)
            worst = max(worst, abs(measured - closed))
        out.append(
            CheckResult(
                f"B_{n}: distance curve matches 2 alpha^k (1 - 1/n) to 1e-10 (k <= 64)",
                worst <= 1e-10,
                {"max_deviation": worst},
            )
        )
    return out


def projection_identities(ns=DEFAULT_GRID_NS) -> list[CheckResult]:
    """Commutation of projection with powers (both projectors) and stability
    of every projected grid instance."""
    out = []
    violations = {"uniform": {}, "pi_weighted": {}}
    worst = {"uniform": 0.0, "pi_weighted": 0.0}
    stable = True
    stable_detail = {}
    for family, n, A in full_grid(ns):
        pi = stochastic.invariant_distribution(A)
        projs = {
            "uniform": projection.projector_uniform(n),
            "pi_weighted": projection.projector_pi(pi),
        }
        for kind, proj in projs.items():
            for k in COMMUTATION_KS:
                dev = projection.commutation_check(A, proj, k)
                worst[kind] = max(worst[kind], dev)
                if dev > 1e-10 * k:
                    violations[kind][f"{family} n={n} k={k}"] = dev
        rho = projection.project(A, projs["uniform"]).spectral_radius
        if rho >= 1.0:
            stable = False
            stable_detail[f"{family}-{n}"] = rho
    for kind in ("uniform", "pi_weighted"):
        out.append(
            CheckResult(
                f"commutation ||(PA)^k - P A^k||_inf <= 1e-10 k ({kind})",
                not violations[kind],
                {"worst_deviation": worst[kind], "violations": violations[kind]},
            )
        )
    out.append(
        CheckResult(
            "rho(QA) < 1 for every primitive grid instance",
            stable,
            stable_detail,
        )
    )
    return out


def gramian_cross_checks(ns=DEFAULT_GRID_NS, direct_cap=gramian.DIRECT_CAP_DEFAULT) -> list[CheckResult]:
    """Cross-solver agreement, fixed-point residuals, and the trace identity
    between controllability and observability Gramians (n <= direct cap)."""
    out = []
    agree_ok = True
    residual_ok = True
    trace_ok = True
    worst_agree = 0.0
    worst_residual = 0.0
    worst_trace = 0.0
    count = 0
    for family, n, A in full_grid(ns):
        if n > direct_cap:
            continue
        count += 1
        M = projection.project(A, projection.projector_uniform(n))
        direct = gramian.solve_lyapunov_direct(M)
        series = gramian.solve_lyapunov_series(M)
        obs = gramian.observability_gramian(M)
        agree = float(np.max(np.abs(direct.P - series.P)))
        worst_agree = max(worst_agree, agree / direct.sigma1)
        if agree > 1e-8 * direct.sigma1:
            agree_ok = False
        worst_residual = max(worst_residual, direct.residual, series.residual, obs.residual)
        if worst_residual > 1e-9:
            residual_ok = False
        tdev = abs(direct.trace - obs.trace) / direct.trace
        worst_trace = max(worst_trace, tdev)
        if tdev > 1e-8:
            trace_ok = False
    out.append(
        CheckResult(
            "direct vs series agreement <= 1e-8 sigma1(P)",
            agree_ok,
            {"worst_relative": worst_agree, "instances": count},
        )
    )
    out.append(
        CheckResult(
            "fixed-point residual <= 1e-9",
            residual_ok,
            {"worst": worst_residual},
        )
    )
    out.append(
        CheckResult(
            "trace(P) = trace(P_obs) to 1e-8 relative",
            trace_ok,
            {"worst_relative": worst_trace},
        )
    )
    return out


def theorem_sandwich(ns=DEFAULT_GRID_NS) -> list[CheckResult]:
    """Finite-n trace upper bound and sigma1 lower bound on every grid
    instance; any violation is reported with full diagnostics."""
    trace_viol = {}
    sigma_viol = {}
    for family, n, A in full_grid(ns):
        check = analysis.verify_theorem_bounds(A)
        key = f"{family}-{n}"
        if not check.trace_upper_ok:
            trace_viol[key] = {
                "trace_P/n": check.trace_P / n,
                "bound": 1.0 + analysis.TRACE_BOUND_CONST * check.var0 * check.t_half,
            }
        if not check.sigma_lower_ok:
            sigma_viol[key] = {
                "sigma1": check.sigma1_P,
                "bound": 1.0 + check.t_quarter_proj / (4.0 * n),
            }
    return [
        CheckResult(
            "trace(P)/n - 1 <= 8 Var0 t(1/2) on every grid instance",
            not trace_viol,
            {"violations": trace_viol},
        ),
        CheckResult(
            "sigma1(P) >= 1 + t_quarter/(4n) on every grid instance",
            not sigma_viol,
            {"violations": sigma_viol},
        ),
    ]


def ratio_constancy_check(ns=DEFAULT_GRID_NS) -> list[CheckResult]:
    """sigma1/t(1/2) stays within a factor-2 band for star and cycle."""
    out = []
    for family in ("lazy-star", "lazy-cycle"):
        result = analysis.ratio_constancy(family, ns)
        out.append(
            CheckResult(
                f"{family} sigma1/t(1/2) spread <= 2 over n in {list(ns)}",
                result.spread <= 2.0,
                {"spread": result.spread, "points": list(result.points)},
            )
        )
    return out


def flocking_checks(ns=DEFAULT_GRID_NS, graphs_per_n=20) -> list[CheckResult]:
    """Random flocking spectral bound and Gramian headroom, plus the cubic
    convergence-time envelope for path flocking."""
    lambda_viol = {}
    medians = []
    sigma_medians = []
    for n in ns:
        sigmas = []
        for seed in range(graphs_per_n):
            A = topology.random_flocking(n, FLOCKING_P.get(n, 0.3), seed)
            check = analysis.flocking_bounds_check(A)
            if not check.lambda2_ok:
                lambda_viol[f"n={n} seed={seed}"] = {
                    "lambda2": check.lambda2,
                    "bound": check.lambda2_bound,
                }
            sigmas.append(check.sigma1)
        medians.append(float(np.median([s / n**2 for s in sigmas])))
        sigma_medians.append(float(np.median(sigmas)))
    no_increase = all(b <= a * 1.05 for a, b in zip(medians, medians[1:]))
    spread = max(medians) / min(medians)
    out = [
        CheckResult(
            f"lambda2(S) <= 1 - 1/n on {graphs_per_n} random graphs per n",
            not lambda_viol,
            {"violations": lambda_viol},
        ),
        CheckResult(
            "sigma1/n^2 per-n medians show no increasing trend",
            no_increase,
            {"medians": medians},
        ),
        CheckResult(
            "max/min of per-n medians of sigma1/n^2 <= 3",
            spread <= 3.0,
            {"spread": spread, "medians": medians, "sigma1_medians": sigma_medians},
        ),
    ]
    # Path flocking: fit the cubic envelope constant on n <= 32, then check
    # the whole grid against it.
    ts = {n: convergence.convergence_time(topology.family_matrix("flocking-path", n), 0.5).t for n in ns}
    fit_ns = [n for n in ns if n <= 32]
    envelope = max(ts[n] / n**3 for n in fit_ns)
    cubic_ok = all(ts[n] <= envelope * n**3 * (1.0 + 1e-12) for n in ns)
    out.append(
        CheckResult(
            "path flocking t(1/2) <= fitted C n^3",
            cubic_ok,
            {"C": envelope, "t": {str(n): ts[n] for n in ns}},
        )
    )
    return out


def theorem1_equivalence(ns=DEFAULT_GRID_NS) -> list[CheckResult]:
    """First k with ||Q A^k||_inf <= 1/2 agrees with t(1/2) within a factor
    of 4 across the grid."""
    violations = {}
    worst = 1.0
    for family, n, A in full_grid(ns):
        cache = stochastic.MatrixPowerCache(A, 0)
        t_half = convergence.convergence_time(A, 0.5, cache=cache).t
        k_half = convergence.projected_threshold_time(A, 0.5, cache=cache)
        ratio = k_half / t_half
        worst = max(worst, ratio, 1.0 / ratio)
        if not (t_half / 4.0 <= k_half <= 4.0 * t_half):
            violations[f"{family}-{n}"] = {"t_half": t_half, "k_half": k_half}
    return [
        CheckResult(
            "first k with ||QA^k||_inf <= 1/2 within factor 4 of t(1/2)",
            not violations,
            {"worst_factor": worst, "violations": violations},
        )
    ]


def trace_comparison(ns=DEFAULT_GRID_NS) -> list[CheckResult]:
    """trace(P(Q_pi A)) dominates trace(P(QA)) on the grid, with equality
    for doubly stochastic families."""
    violations = {}
    equality_dev = 0.0
    for family, n, A in full_grid(ns):
        cmp = analysis.pi_projection_comparison(A)
        if not cmp.ok:
            violations[f"{family}-{n}"] = {
                "trace_uniform": cmp.trace_uniform,
                "trace_pi": cmp.trace_pi,
            }
        if family in DOUBLY_STOCHASTIC_FAMILIES:
            equality_dev = max(
                equality_dev,
                abs(cmp.trace_pi - cmp.trace_uniform) / cmp.trace_uniform,
            )
    return [
        CheckResult(
            "trace(P(Q_pi A)) >= trace(P(QA)) - 1e-8 rel on the grid",
            not violations,
            {"violations": violations},
        ),
        CheckResult(
            "traces equal for doubly stochastic instances (1e-8 rel)",
            equality_dev <= 1e-8,
            {"worst_relative": equality_dev},
        ),
    ]


def shock_equivalence(ns=DEFAULT_GRID_NS, seed=5) -> list[CheckResult]:
    """Simulated x^Q(k) equals (QA)^k omega, and the fitted decay rate
    tracks rho(QA) once the horizon covers 8 t(1/2)."""
    rng = np.random.default_rng(seed)
    eq_viol = {}
    alpha_viol = {}
    worst_eq = 0.0
    worst_alpha = 0.0
    for family, n, A in full_grid(ns):
        omega = rng.standard_normal(n)
        t_half = convergence.convergence_time(A, 0.5).t
        K = 8 * t_half
        response = convergence.simulate_shock(A, omega, K, keep_trajectory=True)
        M = projection.projector_uniform(n).matrix @ A.entries
        key = f"{family}-{n}"
        for k in (0, 1, 2, 5, min(16, K)):
            target = np.linalg.matrix_power(M, k) @ omega if k else (omega - omega.mean())
            dev = float(np.max(np.abs(response.trajectory_xq[k] - target)))
            worst_eq = max(worst_eq, dev)
            if dev > 1e-10:
                eq_viol[f"{key} k={k}"] = dev
        rho = projection.project(A, projection.projector_uniform(n)).spectral_radius
        gap = abs(response.alpha_estimate - rho)
        worst_alpha = max(worst_alpha, gap)
        if gap > 0.05:
            alpha_viol[key] = {"alpha": response.alpha_estimate, "rho": rho}
    return [
        CheckResult(
            "x^Q(k) from simulation equals (QA)^k omega to 1e-10",
            not eq_viol,
            {"worst": worst_eq, "violations": eq_viol},
        ),
        CheckResult(
            "alpha estimate within 0.05 of rho(QA) for K = 8 t(1/2)",
            not alpha_viol,
            {"worst": worst_alpha, "violations": alpha_viol},
        ),
    ]


def nonprimitivity(n=8) -> list[CheckResult]:
    """The directed cycle is rejected as periodic; its lazy version passes."""
    dc = topology.family_matrix("directed-cycle", n)
    report = stochastic.is_primitive(dc)
    rejected = (not report.primitive) and report.reason == "periodic" and report.period == n
    lazy_report = stochastic.is_primitive(topology.lazy(dc))
    raised = False
    try:
        stochastic.invariant_distribution(dc)
    except ConsensusNetworkError:
        raised = True
    return [
        CheckResult(
            f"directed cycle DC_{n} diagnosed Periodic({n})",
            rejected,
            {"reason": report.reason, "period": report.period},
        ),
        CheckResult(
            f"lazy(DC_{n}) accepted as primitive",
            bool(lazy_report),
            {"reason": lazy_report.reason},
        ),
        CheckResult(
            "invariant_distribution rejects the periodic chain",
            raised,
            {},
        ),
    ]


RECIPES = {
    "lazy-cycle-scaling": scaling_lazy_cycle,
    "lazy-star-scaling": scaling_lazy_star,
    "convergence-scaling": convergence_scaling,
    "circulant-spectrum": circulant_spectrum,
    "mixing-example": mixing_example_times,
    "projection-identities": projection_identities,
    "gramian-cross": gramian_cross_checks,
    "theorem-sandwich": theorem_sandwich,
    "ratio-constancy": ratio_constancy_check,
    "flocking": flocking_checks,
    "theorem1-equivalence": theorem1_equivalence,
    "trace-comparison": trace_comparison,
    "shock": shock_equivalence,
    "nonprimitivity": nonprimitivity,
}


def run_recipe(name: str) -> list[CheckResult]:
    if name not in RECIPES:
        raise KeyError(name)
    return RECIPES[name]()
