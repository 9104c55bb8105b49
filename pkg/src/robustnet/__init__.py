"""robustnet: worst-case disturbance amplification bounds for positive
interconnected systems, and exact adjudication of structural changes.

A network is a set of scalar nodes with strictly positive self-feedback
rates and positive weighted directed edges.  The library computes the
minimal certified peak-amplification level, checks and produces
certificates, enumerates cycle small-gain violations, adjudicates whether
adding/removing nodes/edges preserves certified levels (with incremental
rank-one updates), proposes self-feedback repairs for inadmissible edge
additions, and empirically witnesses certified bounds by simulation.
"""

from ._kernels import BACKEND
from .analysis import (
    ARGMAX_RTOL,
    CYCLE_CAP,
    EPS_STAB,
    GAMMA_RTOL,
    Certificate,
    CycleRecord,
    CycleReport,
    NodeCheck,
    RobustnessReport,
    StabilityResult,
    WalkSumResult,
    analyze,
    check_certificate,
    cycle_small_gain,
    cycle_weight,
    enumerate_simple_cycles,
    is_gamma_robust,
    robustness_vector,
    stability,
    walk_sum_oracle,
)
from .changes import (
    AddEdge,
    AddNode,
    AppliedChange,
    ChangeVerdict,
    RemoveEdge,
    RemoveNode,
    RemoveNodeCascade,
    SelfFeedbackRepair,
    SequenceReport,
    SequenceStep,
    SetSelfFeedback,
    StructuralChange,
    apply_change,
    change_from_dict,
    change_to_dict,
    check_sequence,
    diagonal_dominance_check,
    expand_cascade,
    lower_bound_added_edge,
    propose_repair,
    sufficient_local_check,
    verdict,
    verdict_add_edge,
    verdict_add_node,
    verdict_remove_edge,
    verdict_remove_node,
    verdict_set_self_feedback,
)
from .errors import (
    CertifiedBoundError,
    CycleBudgetExceededError,
    IncrementalMismatchError,
    InvalidCertificateError,
    InvalidNetworkError,
    NonFiniteStateError,
    NotDiagonallyDominantError,
    PreconditionViolatedError,
    RobustnetError,
    SequenceStepError,
    UnstableNetworkError,
)
from .model import (
    Network,
    NodeId,
    Violation,
    load_network,
    make_network,
    neighbors_in,
    network_from_dict,
    network_to_dict,
    save_network,
    system_matrix,
    validate,
    weighted_adjacency,
)
from .simulation import (
    DisturbanceSignal,
    Trajectory,
    WitnessReport,
    WitnessTrial,
    monotonicity_probe,
    settling_horizon,
    simulate,
    witness_bound,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
