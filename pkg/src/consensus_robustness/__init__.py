"""Consensus-network robustness toolkit.

Builds row-stochastic consensus networks over named topologies, projects
them onto the disagreement subspace, solves the projected Lyapunov
equations, measures epsilon-convergence times, and verifies the
robustness/convergence-time bounds and scaling laws at finite n.
"""

__version__ = "0.1.0"

from .analysis import (
    BoundsCheck,
    ExponentFit,
    FlockingCheck,
    PiTraceComparison,
    RatioConstancy,
    ScalingSweep,
    SweepRow,
    fit_exponent,
    flocking_bounds_check,
    pi_projection_comparison,
    ratio_constancy,
    sweep,
    sweep_to_csv,
    var0,
    verify_theorem_bounds,
)
from .convergence import (
    ConvergenceReport,
    EpsilonEquivalenceTable,
    ShockResponse,
    convergence_time,
    distance_to_consensus,
    epsilon_equivalence_check,
    projected_norm_curve,
    projected_threshold_time,
    simulate_shock,
)
from .errors import ConsensusNetworkError
from .gramian import (
    FlockingGramianReport,
    GramianReport,
    flocking_weighted_gramian,
    observability_gramian,
    robustness_metrics,
    solve_lyapunov_direct,
    solve_lyapunov_series,
    symmetrized_walk,
)
from .projection import (
    ProjectedNetwork,
    Projector,
    commutation_check,
    project,
    projector_pi,
    projector_uniform,
    spectral_radius,
)
from .stochastic import (
    InvariantDistribution,
    MatrixPowerCache,
    PrimitivityReport,
    StochasticMatrix,
    invariant_distribution,
    is_primitive,
    matrix_power_cache,
    read_matrix,
    validate_stochastic,
    write_matrix,
)
from .topology import (
    FlockingStructure,
    TopologyDescriptor,
    family_matrix,
    family_names,
    flocking,
    generate,
    lazy,
    mixing_example,
    random_flocking,
)

__all__ = [name for name in dir() if not name.startswith("_")]
