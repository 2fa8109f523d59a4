"""Adversarial link attack/defense games over continuous-time averaging networks."""

from .analysis import (
    HorizonReport,
    MpReport,
    OracleResult,
    SpeReport,
    horizon_bound,
    mp_consistency,
    oracle_best_response,
    oracle_game_value,
    spe_condition,
)
from .dynamics import (
    SwitchingSchedule,
    Trajectory,
    WeightFunction,
    costate,
    matrix_exponential_action,
    simulate,
    utility,
)
from .errors import (
    CapExceededError,
    GraphError,
    InvalidActionError,
    InvalidEpsilonError,
    InvalidMatrixError,
    LinkGamesError,
    PreconditionError,
    ScenarioError,
    ScheduleError,
)
from .graph import (
    AdversaryAction,
    DesignerAction,
    ScoredEdgeSet,
    WeightedGraph,
    phi_ell,
    potentials,
    system_matrix,
    weighted_potentials,
)
from .scenario import Scenario, load_scenario, parse_scenario, serialize_scenario
from .strategies import (
    GameConfig,
    GameOutcome,
    adversary_maxmin_first,
    adversary_minmax_response,
    designer_algorithm_one,
    designer_maxmin_response,
    play_maxmin,
    play_minmax,
)

__version__ = "0.1.0"

__all__ = [
    "AdversaryAction",
    "CapExceededError",
    "DesignerAction",
    "GameConfig",
    "GameOutcome",
    "GraphError",
    "HorizonReport",
    "InvalidActionError",
    "InvalidEpsilonError",
    "InvalidMatrixError",
    "LinkGamesError",
    "MpReport",
    "OracleResult",
    "PreconditionError",
    "Scenario",
    "ScenarioError",
    "ScheduleError",
    "ScoredEdgeSet",
    "SpeReport",
    "SwitchingSchedule",
    "Trajectory",
    "WeightFunction",
    "WeightedGraph",
    "adversary_maxmin_first",
    "adversary_minmax_response",
    "costate",
    "designer_algorithm_one",
    "designer_maxmin_response",
    "horizon_bound",
    "load_scenario",
    "matrix_exponential_action",
    "mp_consistency",
    "oracle_best_response",
    "oracle_game_value",
    "parse_scenario",
    "phi_ell",
    "play_maxmin",
    "play_minmax",
    "potentials",
    "serialize_scenario",
    "simulate",
    "spe_condition",
    "system_matrix",
    "utility",
    "weighted_potentials",
]
