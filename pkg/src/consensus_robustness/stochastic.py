"""Validated row-stochastic matrices: stochasticity checks, primitivity,
invariant distributions, and cached matrix powers.

All values are immutable after construction (backing arrays are frozen), so
they are safe to share across threads.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionTooLarge,
    NegativeEntry,
    NoConvergence,
    NonSquare,
    NotPrimitive,
    RowSumViolation,
    UsageError,
)

ROW_SUM_ATOL = 1e-12
# Entries in [ENTRY_CLAMP, 0) are treated as float noise and clamped to 0;
# anything below is a hard error.
ENTRY_CLAMP = -1e-14
POWER_ROW_SUM_ATOL = 1e-10

CACHE_MB_ENV_VAR = "CONSENSUS_ROBUSTNESS_CACHE_MB"
DEFAULT_CACHE_MB = 2048.0


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


def default_cache_mb() -> float:
    """Power-cache memory cap in MiB, overridable via the environment."""
    raw = os.environ.get(CACHE_MB_ENV_VAR)
    if raw is None:
        return DEFAULT_CACHE_MB
    try:
        value = float(raw)
    except ValueError:
        raise UsageError(f"{CACHE_MB_ENV_VAR} must be a number, got {raw!r}")
    if value <= 0:
        raise UsageError(f"{CACHE_MB_ENV_VAR} must be positive, got {raw!r}")
    return value


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """A validated row-stochastic network matrix.

    Attributes
    ----------
    n : int
        Network dimension.
    entries : ndarray
        The n x n matrix; nonnegative, rows sum to 1 within 1e-12. Read-only.
    provenance : str or None
        Human-readable label of the generating topology, when known.
    flocking : object or None
        Adjacency/degree decomposition recorded by the flocking generator
        (a ``topology.FlockingStructure``); None for other sources.
    """

    n: int
    entries: np.ndarray
    provenance: str | None = None
    flocking: object | None = None


@dataclass(frozen=True, eq=False)
class InvariantDistribution:
    """Left fixed point pi of A: pi^T A = pi^T, with sum(pi) = 1.

    ``residual`` is the verified infinity norm of pi^T A - pi^T.
    """

    pi: np.ndarray
    residual: float

    @property
    def n(self) -> int:
        return self.pi.shape[0]


@dataclass(frozen=True)
class PrimitivityReport:
    """Outcome of the primitivity check.

    ``reason`` is one of "primitive", "reducible", "periodic"; ``period``
    is the gcd of closed-walk lengths when the graph is strongly connected.
    """

    primitive: bool
    reason: str
    period: int | None = None

    def __bool__(self) -> bool:
        return self.primitive


def validate_stochastic(raw, provenance=None, flocking=None) -> StochasticMatrix:
    """Validate a raw array as a row-stochastic matrix.

    Entries in [-1e-14, 0) are clamped to 0; anything more negative (or
    non-finite) raises NegativeEntry. Row sums must be 1 within 1e-12.

    Raises
    ------
    NonSquare, NegativeEntry, RowSumViolation
    """
    a = np.array(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise NonSquare(a.shape)
    bad = ~np.isfinite(a) | (a < ENTRY_CLAMP)
    if np.any(bad):
        idx = np.argwhere(bad)
        raise NegativeEntry([(i, j, a[i, j]) for i, j in idx])
    np.clip(a, 0.0, None, out=a)
    sums = a.sum(axis=1)
    dev = sums - 1.0
    offending = np.nonzero(np.abs(dev) > ROW_SUM_ATOL)[0]
    if offending.size:
        raise RowSumViolation([(i, dev[i]) for i in offending])
    return StochasticMatrix(
        n=a.shape[0], entries=_freeze(a), provenance=provenance, flocking=flocking
    )


def _reaches_all(adj_rows: list[np.ndarray], start: int, n: int) -> bool:
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj_rows[u]:
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return bool(seen.all())


def is_primitive(A: StochasticMatrix) -> PrimitivityReport:
    """Check primitivity (irreducible and aperiodic) of the induced digraph.

    Strong connectivity is tested by depth-first search on the sparsity
    pattern (forward and on the transpose); the period is the gcd of
    ``depth(u) + 1 - depth(v)`` over edges u -> v of a breadth-first
    layering, which for strongly connected digraphs equals the gcd of all
    cycle lengths.
    """
    pattern = A.entries > 0.0
    n = A.n
    fwd = [np.nonzero(pattern[i])[0] for i in range(n)]
    bwd = [np.nonzero(pattern[:, i])[0] for i in range(n)]
    if not (_reaches_all(fwd, 0, n) and _reaches_all(bwd, 0, n)):
        return PrimitivityReport(primitive=False, reason="reducible")

    depth = np.full(n, -1, dtype=np.int64)
    depth[0] = 0
    frontier = [0]
    order = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in fwd[u]:
                if depth[v] < 0:
                    depth[v] = depth[u] + 1
                    nxt.append(int(v))
                    order.append(int(v))
        frontier = nxt
    g = 0
    for u in order:
        for v in fwd[u]:
            g = math.gcd(g, int(depth[u]) + 1 - int(depth[v]))
    g = abs(g)
    if g == 1:
        return PrimitivityReport(primitive=True, reason="primitive", period=1)
    return PrimitivityReport(primitive=False, reason="periodic", period=g)


def _pi_residual(pi: np.ndarray, A: np.ndarray) -> float:
    return float(np.max(np.abs(pi @ A - pi)))


def invariant_distribution(A: StochasticMatrix, tol: float = 1e-10) -> InvariantDistribution:
    """Compute the invariant distribution of a primitive stochastic matrix.

    Power iteration on the transpose with uniform start; if the residual
    has not reached ``tol`` within 10 n log n iterations, falls back to a
    dense least-squares solve of (A^T - I) pi = 0 augmented with sum(pi) = 1.

    Raises
    ------
    NotPrimitive, NoConvergence
    """
    report = is_primitive(A)
    if not report:
        raise NotPrimitive(report.reason, report.period)
    M = A.entries
    n = A.n
    At = M.T
    pi = np.full(n, 1.0 / n)
    max_iters = int(math.ceil(10.0 * n * math.log(max(n, 2))))
    check_every = 8
    for it in range(1, max_iters + 1):
        pi = At @ pi
        pi /= pi.sum()
        if it % check_every == 0 or it == max_iters:
            if _pi_residual(pi, M) <= tol:
                return InvariantDistribution(pi=_freeze(pi), residual=_pi_residual(pi, M))
    # Unconditional fallback: stack the fixed-point equations with the
    # normalization row and solve in the least-squares sense.
    lhs = np.vstack([At - np.eye(n), np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    pi = np.where((pi < 0) & (pi > ENTRY_CLAMP), 0.0, pi)
    pi /= pi.sum()
    residual = _pi_residual(pi, M)
    if residual > tol or np.any(pi < 0):
        raise NoConvergence(max_iters, what="invariant distribution solve")
    return InvariantDistribution(pi=_freeze(pi), residual=residual)


class MatrixPowerCache:
    """Cached successive squarings A, A^2, A^4, ..., A^(2^jmax).

    ``power(k)`` assembles A^k from the binary expansion of k, so arbitrary
    powers cost O(log k) multiplies. The cache grows on demand up to the
    memory cap (MiB), which defaults to the value of the
    CONSENSUS_ROBUSTNESS_CACHE_MB environment variable or 2048.
    """

    def __init__(self, A: StochasticMatrix, jmax: int = 0, cache_mb: float | None = None):
        if jmax < 0:
            raise UsageError(f"jmax must be >= 0, got {jmax}")
        self.source = A
        self.n = A.n
        self.cache_mb = float(cache_mb) if cache_mb is not None else default_cache_mb()
        self._powers: list[np.ndarray] = [A.entries]
        self.ensure(jmax)

    def _check_capacity(self, levels: int) -> None:
        required_mb = levels * self.n * self.n * 8 / 2**20
        if required_mb > self.cache_mb:
            raise DimensionTooLarge(required_mb, self.cache_mb)

    def _check_stochastic(self, M: np.ndarray, j: int) -> None:
        dev = M.sum(axis=1) - 1.0
        offending = np.nonzero(np.abs(dev) > POWER_ROW_SUM_ATOL)[0]
        if offending.size:
            raise RowSumViolation([(i, dev[i]) for i in offending])

    def ensure(self, jmax: int) -> None:
        """Extend the cache to hold A^(2^jmax)."""
        self._check_capacity(jmax + 1)
        while len(self._powers) <= jmax:
            nxt = self._powers[-1] @ self._powers[-1]
            self._check_stochastic(nxt, len(self._powers))
            self._powers.append(_freeze(nxt))

    @property
    def jmax(self) -> int:
        return len(self._powers) - 1

    def __len__(self) -> int:
        return len(self._powers)

    def __getitem__(self, j: int) -> np.ndarray:
        """A^(2^j)."""
        return self._powers[j]

    def __iter__(self):
        return iter(self._powers)

    def power(self, k: int) -> np.ndarray:
        """A^k via the binary expansion of k (k >= 0)."""
        if k < 0:
            raise UsageError(f"power requires k >= 0, got {k}")
        if k == 0:
            return np.eye(self.n)
        self.ensure(k.bit_length() - 1)
        out = None
        j = 0
        while k:
            if k & 1:
                out = self._powers[j] if out is None else out @ self._powers[j]
            k >>= 1
            j += 1
        return out


def matrix_power_cache(A: StochasticMatrix, jmax: int, cache_mb: float | None = None) -> MatrixPowerCache:
    """Build the power cache A^1, A^2, A^4, ..., A^(2^jmax)."""
    return MatrixPowerCache(A, jmax=jmax, cache_mb=cache_mb)


def write_matrix(path, A) -> None:
    """Write a matrix in the repo-wide plain-text format.

    First line is n, then n lines of n space-separated decimals printed
    with 17 significant digits (lossless for float64). Lines starting with
    '#' are comments.
    """
    entries = A.entries if isinstance(A, StochasticMatrix) else np.asarray(A, dtype=float)
    n = entries.shape[0]
    lines = [str(n)]
    for row in entries:
        lines.append(" ".join(f"{x:.17g}" for x in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_matrix(path) -> np.ndarray:
    """Read a matrix written by :func:`write_matrix`. Returns the raw array;
    callers validate with :func:`validate_stochastic`."""
    rows = []
    n = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if n is None:
                try:
                    n = int(text)
                except ValueError:
                    raise UsageError(f"{path}: line {lineno}: expected dimension, got {text!r}")
                if n <= 0:
                    raise UsageError(f"{path}: dimension must be positive, got {n}")
                continue
            try:
                row = [float(tok) for tok in text.split()]
            except ValueError:
                raise UsageError(f"{path}: line {lineno}: malformed row")
            if len(row) != n:
                raise UsageError(
                    f"{path}: line {lineno}: expected {n} values, got {len(row)}"
                )
            rows.append(row)
    if n is None:
        raise UsageError(f"{path}: empty matrix file")
    if len(rows) != n:
        raise UsageError(f"{path}: expected {n} rows, got {len(rows)}")
    return np.array(rows, dtype=float)
