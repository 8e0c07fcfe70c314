"""Convergence-time machinery: distance-to-consensus curves, the projected
norm criterion, and shock-response simulation.

Distance to consensus ||A^k - 1 pi^T||_inf is non-increasing in k, so the
first crossing of a threshold is found by doubling to bracket it and then
binary search, assembling A^k from cached squarings (O(log^2 t) multiplies).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HorizonExceeded, NotPrimitive, UsageError
from .projection import projector_uniform
from .stochastic import (
    InvariantDistribution,
    MatrixPowerCache,
    StochasticMatrix,
    invariant_distribution,
    is_primitive,
)

# Doubling is abandoned beyond 2^62 steps: the chain is numerically
# indistinguishable from a periodic one.
MAX_BRACKET_BITS = 62


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    """First k with ||A^k - 1 pi^T||_inf < epsilon, with the distances
    actually probed along the search.

    ``in_equivalence_class`` is False for epsilon >= 1, where the
    convergence time is not topology-informative.
    """

    epsilon: float
    t: int
    probes: tuple[tuple[int, float], ...]
    monotone_ok: bool
    in_equivalence_class: bool

    @property
    def distance_at_t(self) -> float:
        by_k = dict(self.probes)
        return by_k[self.t]


@dataclass(frozen=True, eq=False)
class ShockResponse:
    """Trajectory norms of x(k) = A^k omega and of its projection onto the
    disagreement subspace, with the fitted geometric decay rate.

    ``trajectory_xq`` holds the projected states themselves when the
    simulation was asked to keep them; None otherwise.
    """

    omega: np.ndarray
    horizon: int
    norms_x: tuple[float, ...]
    norms_xq: tuple[float, ...]
    alpha_estimate: float
    trajectory_xq: tuple[np.ndarray, ...] | None = None


@dataclass(frozen=True)
class EpsilonEquivalenceRow:
    epsilon: float
    t: int
    ratio_to_half: float
    bound: int | None
    within_bound: bool | None


@dataclass(frozen=True, eq=False)
class EpsilonEquivalenceTable:
    """Convergence times across epsilon values, normalized by t(1/2).

    For epsilon <= 1/2 the power-composition bound
    t(eps) <= ceil(log2(1/(2 eps)) + 1) * t(1/2) is checked per row.
    """

    t_half: int
    rows: tuple[EpsilonEquivalenceRow, ...]


def distance_to_consensus(A: StochasticMatrix, k: int, pi: InvariantDistribution | None = None) -> float:
    """Exact induced infinity norm of A^k - 1 pi^T (max absolute row sum)."""
    if k < 0:
        raise UsageError(f"distance requires k >= 0, got {k}")
    if pi is None:
        pi = invariant_distribution(A)
    Ak = np.linalg.matrix_power(A.entries, k)
    return float(np.max(np.abs(Ak - pi.pi[None, :]).sum(axis=1)))


def _distance_from_power(Ak: np.ndarray, pi: np.ndarray) -> float:
    return float(np.max(np.abs(Ak - pi[None, :]).sum(axis=1)))


def _first_below(value_at, threshold, strict) -> tuple[int, list[tuple[int, float]]]:
    """Smallest k >= 0 with value_at(k) < threshold (or <= when strict is
    False), assuming the curve is non-increasing. Records all probes."""
    probes = []

    def crossed(v):
        return v < threshold if strict else v <= threshold

    v0 = value_at(0)
    probes.append((0, v0))
    if crossed(v0):
        return 0, probes
    k = 1
    while True:
        v = value_at(k)
        probes.append((k, v))
        if crossed(v):
            break
        if k >= 1 << MAX_BRACKET_BITS:
            raise HorizonExceeded(MAX_BRACKET_BITS)
        k <<= 1
    lo, hi = k // 2, k
    while hi - lo > 1:
        mid = (lo + hi) // 2
        v = value_at(mid)
        probes.append((mid, v))
        if crossed(v):
            hi = mid
        else:
            lo = mid
    return hi, probes


def _monotone(probes, slack=1e-12) -> bool:
    ordered = sorted(probes)
    return all(b[1] <= a[1] + slack for a, b in zip(ordered, ordered[1:]))


def convergence_time(
    A: StochasticMatrix,
    epsilon: float,
    cache: MatrixPowerCache | None = None,
    cache_mb: float | None = None,
) -> ConvergenceReport:
    """Epsilon-convergence time: the first k with distance to consensus
    strictly below epsilon.

    Raises
    ------
    NotPrimitive, HorizonExceeded
    """
    if not (epsilon > 0.0):
        raise UsageError(f"epsilon must be positive, got {epsilon}")
    report = is_primitive(A)
    if not report:
        raise NotPrimitive(report.reason, report.period)
    pi = invariant_distribution(A)
    if cache is None:
        cache = MatrixPowerCache(A, 0, cache_mb=cache_mb)

    def value_at(k):
        return _distance_from_power(cache.power(k), pi.pi)

    t, probes = _first_below(value_at, epsilon, strict=True)
    return ConvergenceReport(
        epsilon=float(epsilon),
        t=t,
        probes=tuple(probes),
        monotone_ok=_monotone(probes),
        in_equivalence_class=epsilon < 1.0,
    )


def projected_norm_curve(
    A: StochasticMatrix,
    ks,
    cache: MatrixPowerCache | None = None,
) -> list[float]:
    """||Q A^k||_inf for each k in an ascending list; non-increasing in k."""
    ks = list(ks)
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise UsageError("ks must be sorted strictly ascending")
    if ks and ks[0] < 0:
        raise UsageError("ks must be nonnegative")
    Q = projector_uniform(A.n).matrix
    if cache is None:
        cache = MatrixPowerCache(A, 0)
    return [float(np.max(np.abs(Q @ cache.power(k)).sum(axis=1))) for k in ks]


def projected_threshold_time(
    A: StochasticMatrix,
    threshold: float,
    cache: MatrixPowerCache | None = None,
) -> int:
    """First k >= 1 with ||Q A^k||_inf <= threshold (the curve starts at
    ||Q||_inf = 2 - 2/n > 1/2 at k = 0)."""
    if not (0.0 < threshold < 1.0):
        raise UsageError(f"threshold must be in (0, 1), got {threshold}")
    Q = projector_uniform(A.n).matrix
    if cache is None:
        cache = MatrixPowerCache(A, 0)

    def value_at(k):
        return float(np.max(np.abs(Q @ cache.power(k)).sum(axis=1)))

    k, _ = _first_below(value_at, threshold, strict=False)
    return k


def simulate_shock(
    A: StochasticMatrix,
    omega,
    K: int,
    keep_trajectory: bool = False,
    tail_floor: float = 1e-280,
) -> ShockResponse:
    """Propagate a shock through x(k) = A^k omega by repeated
    matrix-vector products (A^k is never formed).

    The projected trajectory is x^Q(k) = x(k) - mean(x(k)); its geometric
    decay rate is fitted by least squares on log ||x^Q(k)||_inf over the
    tail half of the horizon (0.0 when the projection is identically zero).
    """
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (A.n,):
        raise UsageError(f"omega must have shape ({A.n},), got {omega.shape}")
    if not np.all(np.isfinite(omega)):
        raise UsageError("omega must be finite")
    if K < 1:
        raise UsageError(f"horizon must be >= 1, got {K}")
    x = omega.copy()
    norms_x = []
    norms_xq = []
    trajectory = [] if keep_trajectory else None
    for _ in range(K + 1):
        xq = x - x.mean()
        norms_x.append(float(np.max(np.abs(x))))
        norms_xq.append(float(np.max(np.abs(xq))))
        if trajectory is not None:
            trajectory.append(xq)
        x = A.entries @ x
    tail_ks = np.arange(K - K // 2, K + 1)
    tail_vals = np.array([norms_xq[k] for k in tail_ks])
    usable = tail_vals > tail_floor
    if usable.sum() >= 2:
        slope = np.polyfit(tail_ks[usable], np.log(tail_vals[usable]), 1)[0]
        alpha = float(np.exp(slope))
    else:
        alpha = 0.0
    return ShockResponse(
        omega=omega,
        horizon=K,
        norms_x=tuple(norms_x),
        norms_xq=tuple(norms_xq),
        alpha_estimate=alpha,
        trajectory_xq=tuple(trajectory) if trajectory is not None else None,
    )


def epsilon_equivalence_check(A: StochasticMatrix, eps_list) -> EpsilonEquivalenceTable:
    """Convergence times for several epsilon in (0, 1), their ratios to
    t(1/2), and the power-composition bound for epsilon <= 1/2."""
    eps_list = [float(e) for e in eps_list]
    for e in eps_list:
        if not (0.0 < e < 1.0):
            raise UsageError(f"epsilon values must be in (0, 1), got {e}")
    cache = MatrixPowerCache(A, 0)
    t_half = convergence_time(A, 0.5, cache=cache).t
    rows = []
    for e in eps_list:
        t = convergence_time(A, e, cache=cache).t
        if e <= 0.5:
            bound = int(math.ceil(math.log2(1.0 / (2.0 * e)) + 1.0)) * t_half
            within = t <= bound
        else:
            bound = None
            within = None
        rows.append(
            EpsilonEquivalenceRow(
                epsilon=e,
                t=t,
                ratio_to_half=t / t_half if t_half else float("inf"),
                bound=bound,
                within_bound=within,
            )
        )
    return EpsilonEquivalenceTable(t_half=t_half, rows=tuple(rows))
