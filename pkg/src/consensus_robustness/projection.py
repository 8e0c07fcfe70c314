"""Projection operators onto the subspace orthogonal to consensus, projected
network matrices, and their stability certificates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EigenSolveFailure, InvalidDimension, NotStable, UsageError
from .stochastic import InvariantDistribution, StochasticMatrix, _freeze

# Certification threshold: spectral radii at or above this are rejected so
# float error cannot certify a marginally stable matrix.
STABILITY_MARGIN = 1e-12

UNIFORM = "uniform"
PI_WEIGHTED = "pi_weighted"


@dataclass(frozen=True, eq=False)
class Projector:
    """Idempotent projector annihilating the consensus direction.

    ``uniform`` is I - J/n (symmetric); ``pi_weighted`` is I - 1 pi^T.
    """

    kind: str
    matrix: np.ndarray
    n: int


@dataclass(frozen=True, eq=False)
class ProjectedNetwork:
    """M = (projector) A with its stability certificate.

    ``decay_alpha`` equals the spectral radius: it is the geometric decay
    rate of the projected powers (Gelfand limit of ||M^k||^(1/k)).
    """

    matrix: np.ndarray
    source: StochasticMatrix
    projector_kind: str
    spectral_radius: float
    decay_alpha: float
    n: int


def projector_uniform(n: int) -> Projector:
    """Q = I - J/n. Row sums are 0 and the infinity norm is 2 - 2/n."""
    if n < 2:
        raise InvalidDimension(n, 2, what="projector")
    Q = np.eye(n) - np.full((n, n), 1.0 / n)
    return Projector(kind=UNIFORM, matrix=_freeze(Q), n=n)


def projector_pi(pi: InvariantDistribution) -> Projector:
    """Q_pi = I - 1 pi^T for a valid invariant distribution."""
    n = pi.n
    Q = np.eye(n) - np.outer(np.ones(n), pi.pi)
    return Projector(kind=PI_WEIGHTED, matrix=_freeze(Q), n=n)


def spectral_radius(M) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    arr = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise EigenSolveFailure("non-finite entries")
    try:
        eigs = np.linalg.eigvals(arr)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveFailure(exc)
    if eigs.size == 0:
        return 0.0
    return float(np.max(np.abs(eigs)))


def project(A: StochasticMatrix, proj: Projector) -> ProjectedNetwork:
    """Form the projected network matrix M = (projector) A and certify
    Schur stability.

    Raises
    ------
    DimensionMismatch
    NotStable
        When the spectral radius is >= 1 - 1e-12, which signals a
        non-primitive source slipped through.
    """
    if A.n != proj.n:
        raise DimensionMismatch(A.n, proj.n)
    M = proj.matrix @ A.entries
    rho = spectral_radius(M)
    if rho >= 1.0 - STABILITY_MARGIN:
        raise NotStable(rho)
    return ProjectedNetwork(
        matrix=_freeze(M),
        source=A,
        projector_kind=proj.kind,
        spectral_radius=rho,
        decay_alpha=rho,
        n=A.n,
    )


def commutation_check(A: StochasticMatrix, proj: Projector, k: int) -> float:
    """Max deviation ||(PA)^k - P A^k||_inf between projecting before and
    after taking powers; the two commute exactly in exact arithmetic."""
    if k < 1:
        raise UsageError(f"commutation check requires k >= 1, got {k}")
    if A.n != proj.n:
        raise DimensionMismatch(A.n, proj.n)
    P = proj.matrix
    lhs = np.linalg.matrix_power(P @ A.entries, k)
    rhs = P @ np.linalg.matrix_power(A.entries, k)
    return float(np.max(np.abs(lhs - rhs).sum(axis=1)))
