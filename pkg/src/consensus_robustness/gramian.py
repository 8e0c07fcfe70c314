"""Discrete Lyapunov solvers for the projected-network Gramian and the
robustness metrics read off it.

Two deliberately independent solvers are provided: a dense linearization of
the n^2 unknowns (small n) and a squared-doubling series accumulation with a
computable tail bound (any n). Each serves as the other's oracle in tests.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import DimensionTooLarge, NoConvergence, NotFlocking, NotStable, SingularSystem
from .projection import STABILITY_MARGIN, ProjectedNetwork, projector_uniform, spectral_radius
from .stochastic import StochasticMatrix, _freeze
from .topology import FlockingStructure

DIRECT_CAP_DEFAULT = 48
MAX_DOUBLINGS = 64
SERIES_TOL_DEFAULT = 1e-10

CONTROLLABILITY = "controllability"
OBSERVABILITY = "observability"
FLOCKING_WEIGHTED = "flocking_weighted"


@dataclass(frozen=True, eq=False)
class GramianReport:
    """Solution P of the variant's fixed-point equation with its metrics.

    ``residual`` is the Frobenius-relative defect of the defining equation;
    ``sigma1`` is the largest eigenvalue of the symmetric P. ``tail_bound``
    and ``doublings`` are populated by the series solver only.
    """

    P: np.ndarray
    n: int
    trace: float
    sigma1: float
    method: str
    residual: float
    variant: str
    tail_bound: float | None = None
    doublings: int | None = None
    wall_time_ms: float = 0.0


@dataclass(frozen=True, eq=False)
class FlockingGramianReport(GramianReport):
    """Gramian of the degree-weighted equation P = A^T P A + Q, plus the
    symmetrized walk matrix and its second eigenvalue."""

    symmetrized: np.ndarray | None = None
    lambda2: float | None = None


def _require_stable(M: ProjectedNetwork) -> None:
    if M.spectral_radius >= 1.0 - STABILITY_MARGIN:
        raise NotStable(M.spectral_radius)


def _sigma1_psd(P: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(P)[-1])


def _relative_residual(defect: np.ndarray, P: np.ndarray) -> float:
    return float(np.linalg.norm(defect) / np.linalg.norm(P))


def _spectral_norm_estimate(M: np.ndarray, rng: np.random.Generator, iters: int = 25) -> float:
    """Upper estimate of ||M||_2: power iteration on M^T M, doubled for
    conservatism, capped by the rigorous sqrt(||M||_1 ||M||_inf) bound."""
    n = M.shape[0]
    v = rng.standard_normal(n)
    nv = np.linalg.norm(v)
    if nv == 0:
        v = np.ones(n)
        nv = np.linalg.norm(v)
    v /= nv
    est = 0.0
    for _ in range(iters):
        w = M.T @ (M @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
        est = float(np.linalg.norm(M @ v))
    rigorous = float(
        np.sqrt(np.linalg.norm(M, 1) * np.linalg.norm(M, np.inf))
    )
    return min(2.0 * est, rigorous)


def _sigma1_estimate_psd(P: np.ndarray, iters: int = 25) -> float:
    """Upper estimate of the top eigenvalue of a symmetric PSD matrix."""
    n = P.shape[0]
    v = np.ones(n) / np.sqrt(n)
    for _ in range(iters):
        w = P @ v
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
    return 1.1 * float(v @ (P @ v))


def solve_lyapunov_direct(M: ProjectedNetwork, cap: int = DIRECT_CAP_DEFAULT) -> GramianReport:
    """Solve M P M^T + I = P by dense linearization of the n^2 unknowns.

    Raises
    ------
    NotStable, SingularSystem, DimensionTooLarge (n above ``cap``)
    """
    _require_stable(M)
    n = M.n
    if n > cap:
        required_mb = (n**4) * 8 / 2**20
        raise DimensionTooLarge(required_mb, (cap**4) * 8 / 2**20)
    start = time.perf_counter()
    body = M.matrix
    K = np.eye(n * n) - np.kron(body, body)
    try:
        vec = np.linalg.solve(K, np.eye(n).reshape(-1))
    except np.linalg.LinAlgError:
        raise SingularSystem(n)
    P = vec.reshape(n, n)
    P = (P + P.T) / 2.0
    defect = body @ P @ body.T + np.eye(n) - P
    elapsed = (time.perf_counter() - start) * 1e3
    return GramianReport(
        P=_freeze(P),
        n=n,
        trace=float(np.trace(P)),
        sigma1=_sigma1_psd(P),
        method="direct",
        residual=_relative_residual(defect, P),
        variant=CONTROLLABILITY,
        wall_time_ms=elapsed,
    )


def _series_accumulate(M, weight, transpose, tol, max_doublings, progress):
    """Doubling accumulation of sum_k M^k W (M^k)^T (or the transposed
    orientation), stopping once the geometric tail bound drops below tol.

    Returns (P, tail_bound, doublings). The tail bound after step j is
    ||M_j||^2 sigma1(P_j) / (1 - ||M_j||^2) with M_j = M^(2^j), valid once
    ||M_j|| < 1 (guaranteed eventually for stable M).
    """
    rng = np.random.default_rng(0x5EED)
    P = weight.copy()
    Mj = M.copy()
    for j in range(1, max_doublings + 1):
        if transpose:
            P = P + Mj.T @ P @ Mj
        else:
            P = P + Mj @ P @ Mj.T
        Mj = Mj @ Mj
        norm_bound = _spectral_norm_estimate(Mj, rng)
        tail = np.inf
        if norm_bound < 1.0:
            sq = norm_bound * norm_bound
            tail = sq * _sigma1_estimate_psd(P) / (1.0 - sq)
        if progress is not None and not progress(j, tail):
            raise NoConvergence(j, what="series solve (cancelled)")
        if tail < tol:
            return (P + P.T) / 2.0, float(tail), j
    raise NoConvergence(max_doublings, what="series gramian solve")


def solve_lyapunov_series(
    M: ProjectedNetwork,
    tol: float = SERIES_TOL_DEFAULT,
    max_doublings: int = MAX_DOUBLINGS,
    progress=None,
) -> GramianReport:
    """Solve M P M^T + I = P by squared-doubling series accumulation.

    ``progress(step, tail_bound)`` is called after each doubling; returning
    False cancels the solve. The fixed-point residual is re-verified on the
    accumulated solution.

    Raises
    ------
    NotStable, NoConvergence
    """
    _require_stable(M)
    n = M.n
    start = time.perf_counter()
    body = M.matrix
    P, tail, doublings = _series_accumulate(
        body, np.eye(n), False, tol, max_doublings, progress
    )
    defect = body @ P @ body.T + np.eye(n) - P
    elapsed = (time.perf_counter() - start) * 1e3
    return GramianReport(
        P=_freeze(P),
        n=n,
        trace=float(np.trace(P)),
        sigma1=_sigma1_psd(P),
        method="series_doubling",
        residual=_relative_residual(defect, P),
        variant=CONTROLLABILITY,
        tail_bound=tail,
        doublings=doublings,
        wall_time_ms=elapsed,
    )


def observability_gramian(
    M: ProjectedNetwork,
    tol: float = SERIES_TOL_DEFAULT,
    cap: int = DIRECT_CAP_DEFAULT,
) -> GramianReport:
    """Solve the transposed equation M^T P M + I = P.

    Uses the dense linearization for n <= ``cap`` and the doubling series
    above it. The trace always equals the controllability trace.
    """
    _require_stable(M)
    n = M.n
    start = time.perf_counter()
    body = M.matrix
    if n <= cap:
        method = "direct"
        K = np.eye(n * n) - np.kron(body.T, body.T)
        try:
            vec = np.linalg.solve(K, np.eye(n).reshape(-1))
        except np.linalg.LinAlgError:
            raise SingularSystem(n)
        P = vec.reshape(n, n)
        P = (P + P.T) / 2.0
        tail = None
        doublings = None
    else:
        method = "series_doubling"
        P, tail, doublings = _series_accumulate(body, np.eye(n), True, tol, MAX_DOUBLINGS, None)
    defect = body.T @ P @ body + np.eye(n) - P
    elapsed = (time.perf_counter() - start) * 1e3
    return GramianReport(
        P=_freeze(P),
        n=n,
        trace=float(np.trace(P)),
        sigma1=_sigma1_psd(P),
        method=method,
        residual=_relative_residual(defect, P),
        variant=OBSERVABILITY,
        tail_bound=tail,
        doublings=doublings,
        wall_time_ms=elapsed,
    )


def symmetrized_walk(A: StochasticMatrix) -> tuple[np.ndarray, float]:
    """Symmetrization S = D^(1/2) A D^(-1/2) of a flocking matrix and its
    second largest eigenvalue in magnitude."""
    structure = A.flocking
    if not isinstance(structure, FlockingStructure):
        raise NotFlocking()
    root = np.sqrt(structure.degrees)
    S = (A.entries * root[:, None]) / root[None, :]
    S = (S + S.T) / 2.0
    eigs = np.sort(np.abs(np.linalg.eigvalsh(S)))
    lambda2 = float(eigs[-2])
    return S, lambda2


def flocking_weighted_gramian(
    A: StochasticMatrix, tol: float = SERIES_TOL_DEFAULT
) -> FlockingGramianReport:
    """Solve the degree-weighted equation P = A^T P A + Q for a flocking
    network, and report the symmetrized walk matrix and its lambda2.

    The unique solution on the stable subspace is the series
    sum_k (M^k)^T Q M^k with M = QA, accumulated by doubling.

    Raises
    ------
    NotFlocking, NotStable, NoConvergence
    """
    S, lambda2 = symmetrized_walk(A)
    n = A.n
    Q = projector_uniform(n).matrix
    M = Q @ A.entries
    rho = spectral_radius(M)
    if rho >= 1.0 - STABILITY_MARGIN:
        raise NotStable(rho)
    start = time.perf_counter()
    P, tail, doublings = _series_accumulate(M, Q.copy(), True, tol, MAX_DOUBLINGS, None)
    defect = A.entries.T @ P @ A.entries + Q - P
    elapsed = (time.perf_counter() - start) * 1e3
    return FlockingGramianReport(
        P=_freeze(P),
        n=n,
        trace=float(np.trace(P)),
        sigma1=_sigma1_psd(P),
        method="series_doubling",
        residual=_relative_residual(defect, P),
        variant=FLOCKING_WEIGHTED,
        tail_bound=tail,
        doublings=doublings,
        wall_time_ms=elapsed,
        symmetrized=_freeze(S),
        lambda2=lambda2,
    )


def robustness_metrics(report: GramianReport) -> dict:
    """Extract the two robustness measures from a solved Gramian: the trace
    and the largest singular value (= top eigenvalue for symmetric PSD P)."""
    P = report.P
    return {"trace": float(np.trace(P)), "sigma1": _sigma1_psd(P)}
