"""Generators for the network families used throughout the toolkit, plus the
lazy transform A -> (A + I)/2."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AsymmetricEdgeList,
    DisconnectedGraph,
    InvalidDimension,
    RetriesExhausted,
    UsageError,
    ZeroDegreeNode,
)
from .stochastic import StochasticMatrix, _freeze, validate_stochastic

KINDS = ("star", "cycle", "directed_cycle", "complete", "path", "flocking", "mixing_example")

# Kinds built on a cycle need at least 3 nodes.
_MIN_N = {"cycle": 3, "directed_cycle": 3, "mixing_example": 3}

RANDOM_FLOCKING_RETRIES = 200


@dataclass(frozen=True)
class TopologyDescriptor:
    """Named topology plus its kind-specific parameters.

    Serializes to a key=value config line used by the CLI and embedded in
    sweep reports, e.g. ``kind=flocking n=32 p=0.2 seed=7 self_loops=true``.
    """

    kind: str
    n: int
    p: float | None = None
    seed: int | None = None
    self_loops: bool = True
    edges: tuple[tuple[int, int], ...] | None = None

    def config_line(self) -> str:
        parts = [f"kind={self.kind}", f"n={self.n}"]
        if self.p is not None:
            parts.append(f"p={self.p:g}")
        if self.seed is not None:
            parts.append(f"seed={self.seed}")
        if self.kind == "flocking":
            parts.append(f"self_loops={'true' if self.self_loops else 'false'}")
        return " ".join(parts)

    @staticmethod
    def parse(line: str) -> "TopologyDescriptor":
        kwargs = {}
        for token in line.split():
            if "=" not in token:
                raise UsageError(f"bad descriptor token {token!r}, expected key=value")
            key, value = token.split("=", 1)
            if key == "kind":
                kwargs["kind"] = value
            elif key == "n":
                kwargs["n"] = int(value)
            elif key == "p":
                kwargs["p"] = float(value)
            elif key == "seed":
                kwargs["seed"] = int(value)
            elif key == "self_loops":
                kwargs["self_loops"] = value.lower() in ("true", "1", "yes")
            else:
                raise UsageError(f"unknown descriptor key {key!r}")
        if "kind" not in kwargs or "n" not in kwargs:
            raise UsageError(f"descriptor needs at least kind and n: {line!r}")
        return TopologyDescriptor(**kwargs)


@dataclass(frozen=True, eq=False)
class FlockingStructure:
    """Decomposition A = D^-1 Adj recorded by the flocking generator."""

    adjacency: np.ndarray
    degrees: np.ndarray
    self_loops: bool


def _validate_n(desc_kind: str, n: int) -> None:
    minimum = _MIN_N.get(desc_kind, 2)
    if n < minimum:
        raise InvalidDimension(n, minimum, what=desc_kind)


def _star(n: int) -> np.ndarray:
    # Hub is node 0: hub row uniform over leaves, leaf rows point to the hub.
    A = np.zeros((n, n))
    A[0, 1:] = 1.0 / (n - 1)
    A[1:, 0] = 1.0
    return A


def _cycle(n: int) -> np.ndarray:
    A = np.zeros((n, n))
    for i in range(n):
        A[i, (i + 1) % n] = 0.5
        A[i, (i - 1) % n] = 0.5
    return A


def _directed_cycle(n: int) -> np.ndarray:
    A = np.zeros((n, n))
    for i in range(n):
        A[i, (i + 1) % n] = 1.0
    return A


def _path(n: int) -> np.ndarray:
    A = np.zeros((n, n))
    A[0, 1] = 1.0
    A[n - 1, n - 2] = 1.0
    for i in range(1, n - 1):
        A[i, i - 1] = 0.5
        A[i, i + 1] = 0.5
    return A


def generate(desc: TopologyDescriptor) -> StochasticMatrix:
    """Build the row-stochastic matrix for a topology descriptor.

    Raises
    ------
    InvalidDimension, and for flocking kinds the generator's own errors.
    """
    if desc.kind not in KINDS:
        raise UsageError(f"unknown topology kind {desc.kind!r}, expected one of {KINDS}")
    _validate_n(desc.kind, desc.n)
    if desc.kind == "mixing_example":
        return mixing_example(desc.n)
    if desc.kind == "flocking":
        if desc.edges is not None:
            return flocking(desc.edges, desc.n, self_loops=desc.self_loops)
        if desc.p is None:
            raise UsageError("flocking descriptor needs either edges or p (random)")
        return random_flocking(desc.n, desc.p, desc.seed if desc.seed is not None else 0)
    builders = {
        "star": _star,
        "cycle": _cycle,
        "directed_cycle": _directed_cycle,
        "complete": lambda n: np.full((n, n), 1.0 / n),
        "path": _path,
    }
    return validate_stochastic(builders[desc.kind](desc.n), provenance=desc.config_line())


def lazy(A: StochasticMatrix) -> StochasticMatrix:
    """The lazy version (A + I)/2; primitive whenever A is irreducible."""
    entries = (A.entries + np.eye(A.n)) / 2.0
    label = f"lazy({A.provenance})" if A.provenance else "lazy"
    return validate_stochastic(entries, provenance=label)


def mixing_example(n: int) -> StochasticMatrix:
    """The rank-one mixing family alpha*I + (1-alpha)*J/n with
    alpha = 1 - 1/(n-1)."""
    if n < 3:
        raise InvalidDimension(n, 3, what="mixing_example")
    alpha = 1.0 - 1.0 / (n - 1)
    entries = alpha * np.eye(n) + (1.0 - alpha) * np.full((n, n), 1.0 / n)
    return validate_stochastic(entries, provenance=f"kind=mixing_example n={n}")


def _connected(adjacency: np.ndarray) -> tuple[bool, int]:
    n = adjacency.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    stack = [0]
    while stack:
        u = stack.pop()
        for v in np.nonzero(adjacency[u])[0]:
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    reached = int(seen.sum())
    return reached == n, reached


def flocking(edges, n: int, self_loops: bool = True) -> StochasticMatrix:
    """Degree-normalized walk A = D^-1 Adj on a symmetric adjacency.

    ``edges`` is a list of directed pairs (i, j); the resulting relation
    must be symmetric. Optional self-loops put 1 on the diagonal before
    degree normalization. The adjacency and degrees are recorded on the
    result for later symmetrization.

    Raises
    ------
    AsymmetricEdgeList, DisconnectedGraph, ZeroDegreeNode, InvalidDimension
    """
    if n < 2:
        raise InvalidDimension(n, 2, what="flocking")
    adjacency = np.zeros((n, n))
    for i, j in edges:
        if not (0 <= i < n and 0 <= j < n):
            raise UsageError(f"edge ({i}, {j}) out of range for n = {n}")
        adjacency[i, j] = 1.0
    mismatch = np.argwhere(adjacency != adjacency.T)
    if mismatch.size:
        missing = [(i, j) for i, j in mismatch if adjacency[i, j] == 1.0]
        raise AsymmetricEdgeList(missing)
    if self_loops:
        np.fill_diagonal(adjacency, 1.0)
    degrees = adjacency.sum(axis=1)
    zero = np.nonzero(degrees == 0)[0]
    if zero.size:
        raise ZeroDegreeNode(zero)
    ok, reached = _connected(adjacency)
    if not ok:
        raise DisconnectedGraph(reached, n)
    entries = adjacency / degrees[:, None]
    desc = TopologyDescriptor(kind="flocking", n=n, self_loops=self_loops)
    structure = FlockingStructure(
        adjacency=_freeze(adjacency), degrees=_freeze(degrees), self_loops=self_loops
    )
    return validate_stochastic(entries, provenance=desc.config_line(), flocking=structure)


def random_flocking(n: int, p: float, seed: int) -> StochasticMatrix:
    """Random connected undirected flocking network (self-loops on).

    Draws Erdos-Renyi graphs G(n, p) until one is connected (bounded
    retries); deterministic for a fixed seed.

    Raises
    ------
    RetriesExhausted, InvalidDimension
    """
    if n < 2:
        raise InvalidDimension(n, 2, what="flocking")
    if not (0.0 < p <= 1.0):
        raise UsageError(f"edge probability must be in (0, 1], got {p}")
    rng = np.random.default_rng(seed)
    for _ in range(RANDOM_FLOCKING_RETRIES):
        upper = np.triu(rng.random((n, n)) < p, 1)
        adjacency = (upper | upper.T).astype(float)
        np.fill_diagonal(adjacency, 1.0)
        ok, _ = _connected(adjacency)
        if not ok:
            continue
        degrees = adjacency.sum(axis=1)
        entries = adjacency / degrees[:, None]
        desc = TopologyDescriptor(kind="flocking", n=n, p=p, seed=seed)
        structure = FlockingStructure(
            adjacency=_freeze(adjacency), degrees=_freeze(degrees), self_loops=True
        )
        return validate_stochastic(
            entries, provenance=desc.config_line(), flocking=structure
        )
    raise RetriesExhausted(RANDOM_FLOCKING_RETRIES, n, p)


def _undirected(pairs) -> list[tuple[int, int]]:
    out = []
    for i, j in pairs:
        out.append((i, j))
        out.append((j, i))
    return out


def path_edges(n: int) -> list[tuple[int, int]]:
    """Symmetric edge list of the path graph 0-1-...-(n-1)."""
    return _undirected((i, i + 1) for i in range(n - 1))


def complete_edges(n: int) -> list[tuple[int, int]]:
    """Symmetric edge list of the complete graph (no self-loops)."""
    return _undirected((i, j) for i in range(n) for j in range(i + 1, n))


# Named families accepted by the CLI and the sweep harness. "lazy-" prefixes
# apply the lazy transform to the base family.
BASE_FAMILIES = ("star", "cycle", "directed-cycle", "complete", "path", "mixing-example")
FLOCKING_FAMILIES = ("flocking-random", "flocking-path", "flocking-complete")


def family_names() -> list[str]:
    names = list(BASE_FAMILIES)
    names += [f"lazy-{name}" for name in BASE_FAMILIES if name != "mixing-example"]
    names += list(FLOCKING_FAMILIES)
    return names


def family_matrix(family: str, n: int, p: float | None = None, seed: int = 0) -> StochasticMatrix:
    """Build a named family member, e.g. ``family_matrix("lazy-cycle", 16)``.

    ``p``/``seed`` only apply to flocking-random (p defaults to 0.3).
    """
    name = family.strip().lower()
    if name.startswith("lazy-"):
        return lazy(family_matrix(name[len("lazy-"):], n, p=p, seed=seed))
    if name == "mixing-example":
        return mixing_example(n)
    if name == "flocking-random":
        return random_flocking(n, 0.3 if p is None else p, seed)
    if name == "flocking-path":
        return flocking(path_edges(n), n, self_loops=True)
    if name == "flocking-complete":
        return flocking(complete_edges(n), n, self_loops=True)
    if name in ("star", "cycle", "complete", "path"):
        return generate(TopologyDescriptor(kind=name, n=n))
    if name == "directed-cycle":
        return generate(TopologyDescriptor(kind="directed_cycle", n=n))
    raise UsageError(f"unknown family {family!r}; known: {', '.join(family_names())}")
