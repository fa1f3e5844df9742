"""Team task assignment, appraisal networks and collective learning dynamics."""

from .core import (
    SQRT,
    ConfigError,
    DomainError,
    InfluenceParams,
    PerformanceFunction,
    feedback_signal,
    mismatch_h1,
    performance,
)
from .dynamics import (
    ModelSpec,
    ReducedState,
    assignment_box_bounds,
    positivity_tau_ratio_threshold,
    reduce_state,
    reduced_assignment,
    rhs_assign_appraise,
    rhs_assign_appraise_influence,
    rhs_generalized_replicator,
    rhs_manager,
    rhs_reduced,
    self_appraisal_margin,
    split_appraisals,
)
from .graph import (
    ConnectivityReport,
    EigenvectorError,
    classify_connectivity,
    in_degree_assignment,
    left_dominant_eigenvector,
    workload_diffusion,
)
from .integrate import IntegratorConfig, Trajectory, integrate, integrate_batch
from .metrics import (
    ComparativeAppraisalGraph,
    appraisal_consensus_spread,
    comparative_graph,
    lyapunov_manager,
    lyapunov_ratio,
    nontransitive_triad_count,
)

__version__ = "0.1.0"
