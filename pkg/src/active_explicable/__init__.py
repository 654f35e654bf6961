"""Active explicable planning: belief-tracking plan synthesis for human observers."""

from .core import (
    DomainError,
    DomainModel,
    GroundAction,
    ModelFeature,
    ModelSpace,
    Plan,
    PlanningProblem,
    apply_action,
    build_model_space,
    is_applicable,
    validate_plan,
)
from .planner import (
    CandidatePlanSet,
    PlanningBudgetExceeded,
    UnsolvableError,
    enumerate_candidate_plans,
    optimal_plan,
)

__version__ = "0.1.0"
