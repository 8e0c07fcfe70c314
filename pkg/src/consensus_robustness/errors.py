"""Exception types shared across the toolkit.

Every domain error carries its context as attributes so the CLI can render
a machine-readable error object without string parsing.
"""


class ConsensusNetworkError(Exception):
    """Base class for all domain errors raised by this package."""

    def details(self) -> dict:
        """Structured payload for machine-readable error reports."""
        out = {}
        for key, value in self.__dict__.items():
            if key.startswith("_"):
                continue
            if hasattr(value, "tolist"):
                value = value.tolist()
            out[key] = value
        return out


class NonSquare(ConsensusNetworkError):
    def __init__(self, shape):
        self.shape = tuple(shape)
        super().__init__(f"matrix must be square and 2-d, got shape {self.shape}")


class NegativeEntry(ConsensusNetworkError):
    def __init__(self, entries):
        # entries: list of (row, col, value) below the clamp threshold
        self.entries = [(int(i), int(j), float(v)) for i, j, v in entries]
        i, j, v = self.entries[0]
        super().__init__(
            f"{len(self.entries)} invalid entr{'y' if len(self.entries) == 1 else 'ies'}, "
            f"first at ({i}, {j}) = {v!r}"
        )


class RowSumViolation(ConsensusNetworkError):
    def __init__(self, violations):
        # violations: list of (row, deviation from 1)
        self.violations = [(int(i), float(d)) for i, d in violations]
        self.row, self.deviation = self.violations[0]
        super().__init__(
            f"{len(self.violations)} row(s) do not sum to 1, "
            f"first: row {self.row} deviates by {self.deviation:+.3e}"
        )


class NotPrimitive(ConsensusNetworkError):
    def __init__(self, reason, period=None):
        self.reason = reason
        self.period = period
        msg = f"matrix is not primitive: {reason}"
        if period is not None:
            msg += f" (period {period})"
        super().__init__(msg)


class NoConvergence(ConsensusNetworkError):
    def __init__(self, iterations, what="iterative solve"):
        self.iterations = int(iterations)
        self.what = what
        super().__init__(f"{what} did not converge after {iterations} iterations")


class DimensionTooLarge(ConsensusNetworkError):
    def __init__(self, required_mb, cap_mb):
        self.required_mb = float(required_mb)
        self.cap_mb = float(cap_mb)
        super().__init__(
            f"estimated memory {required_mb:.1f} MiB exceeds cap {cap_mb:.1f} MiB"
        )


class InvalidDimension(ConsensusNetworkError):
    def __init__(self, n, minimum, what="network"):
        self.n = int(n)
        self.minimum = int(minimum)
        super().__init__(f"{what} requires n >= {minimum}, got n = {n}")


class DisconnectedGraph(ConsensusNetworkError):
    def __init__(self, reached, n):
        self.reached = int(reached)
        self.n = int(n)
        super().__init__(f"graph is not connected: reached {reached} of {n} nodes")


class AsymmetricEdgeList(ConsensusNetworkError):
    def __init__(self, missing):
        # missing: (i, j) pairs present without their reverse
        self.missing = [(int(i), int(j)) for i, j in missing]
        super().__init__(
            f"edge list is not symmetric, {len(self.missing)} unmatched pair(s), "
            f"first: {self.missing[0]}"
        )


class ZeroDegreeNode(ConsensusNetworkError):
    def __init__(self, nodes):
        self.nodes = [int(i) for i in nodes]
        super().__init__(f"node(s) with zero degree: {self.nodes}")


class RetriesExhausted(ConsensusNetworkError):
    def __init__(self, retries, n, p):
        self.retries = int(retries)
        self.n = int(n)
        self.p = float(p)
        super().__init__(
            f"no connected graph found in {retries} draws (n={n}, p={p})"
        )


class DimensionMismatch(ConsensusNetworkError):
    def __init__(self, left, right):
        self.left = int(left)
        self.right = int(right)
        super().__init__(f"dimension mismatch: {left} vs {right}")


class NotStable(ConsensusNetworkError):
    def __init__(self, spectral_radius):
        self.spectral_radius = float(spectral_radius)
        super().__init__(
            f"matrix is not Schur stable: spectral radius {spectral_radius:.15g}"
        )


class SingularSystem(ConsensusNetworkError):
    def __init__(self, n):
        self.n = int(n)
        super().__init__(
            f"linearized fixed-point system is singular (n={n}); "
            "spectral radius is numerically >= 1"
        )


class EigenSolveFailure(ConsensusNetworkError):
    def __init__(self, cause):
        self.cause = str(cause)
        super().__init__(f"eigenvalue computation failed: {cause}")


class NotFlocking(ConsensusNetworkError):
    def __init__(self):
        super().__init__(
            "matrix has no flocking provenance (adjacency/degree decomposition)"
        )


class ConsensusAlreadyReached(ConsensusNetworkError):
    def __init__(self, var0):
        self.var0 = float(var0)
        super().__init__(
            f"all rows are identical up to tolerance (Var0 = {var0:.3e}); "
            "consensus already reached"
        )


class NonPositiveValue(ConsensusNetworkError):
    def __init__(self, index, value):
        self.index = int(index)
        self.value = float(value)
        super().__init__(
            f"log-log fit requires positive values, got {value!r} at index {index}"
        )


class HorizonExceeded(ConsensusNetworkError):
    def __init__(self, horizon):
        self.horizon = int(horizon)
        super().__init__(
            f"no bracket below k = 2^{horizon}; chain is numerically near-periodic"
        )


class UsageError(ConsensusNetworkError):
    def __init__(self, message):
        super().__init__(message)
