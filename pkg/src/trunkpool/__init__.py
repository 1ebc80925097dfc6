"""Partial server pooling between two Erlang-B loss systems.

Exact and approximate blocking probabilities under probabilistic and
bounded-overflow sharing, Pareto frontiers of sharing configurations,
bargaining solutions over the frontier, QED large-system approximations,
and a discrete-event simulation oracle.
"""

from .erlang import erlang_b, erlang_b_qed, invert_erlang_b
from .errors import (
    BracketError,
    DomainError,
    NumericError,
    ScenarioError,
    TrunkpoolError,
)
from .exact import (
    AcceptancePolicy,
    BlockingResult,
    SharingModel,
    SharingPoint,
    StationaryDistribution,
    SystemConfig,
    blocking,
    blocking_bounded_overflow,
    blocking_from_policy,
    blocking_probabilistic,
    overall_blocking,
    policy_from_sharing,
    sharing_point_from_normalized,
    stationary_distribution,
)
from .pareto import (
    FrontierCase,
    ParetoFrontier,
    classify_case,
    compute_frontier,
    find_improving_direction,
    is_qos_stable,
    sweep_point,
    sweep_xy,
)
from .bargaining import BargainingOutcome, Concept
from .qed import QedParams, map_finite_to_qed, qed_blocking, qed_full_pooling
from .scenario import Scenario, load_scenario, parse_scenario

__version__ = "0.1.0"
