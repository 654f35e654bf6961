"""Plan selection under the optimal, statically explicable and active explicable objectives."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import ModelSpace, Plan, PlanningProblem, to_fraction
from .explicability import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    Belief,
    ExplicabilityParams,
    active_explicability_details,
    static_explicability,
)
from .planner import DEFAULT_MAX_PLANS, DEFAULT_ZETA, UnsolvableError, enumerate_candidate_plans, optimal_plan

OBJECTIVES = ("OP", "EXP", "ActiveEXP")
DEFAULT_GAMMA = Fraction(1, 20)
TIE_DIGITS = 12


def parse_objective(name: str) -> str:
    for o in OBJECTIVES:
        if name.lower() == o.lower():
            return o
    raise ValueError(f"unknown objective {name!r}; expected one of {', '.join(OBJECTIVES)}")


@dataclass(frozen=True)
class SynthesisConfig:
    gamma: Fraction = DEFAULT_GAMMA
    zeta: Fraction = DEFAULT_ZETA
    beta: float = DEFAULT_BETA
    alpha: float = DEFAULT_ALPHA
    max_plans: Optional[int] = DEFAULT_MAX_PLANS
    objective: str = "ActiveEXP"

    def __post_init__(self):
        object.__setattr__(self, "gamma", to_fraction(self.gamma))
        object.__setattr__(self, "objective", parse_objective(self.objective))
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        self.params  # validates the shared fields

    @property
    def params(self) -> ExplicabilityParams:
        return ExplicabilityParams(self.zeta, self.beta, self.alpha, self.max_plans)


@dataclass
class SynthesisResult:
    objective: str
    plan: Plan
    score: float
    cost: Fraction
    objective_value: float
    per_step_beliefs: list = field(default_factory=list)
    candidates_considered: int = 0
    truncation_flags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "plan": list(self.plan.actions),
            "cost": str(self.cost),
            "score": self.score,
            "objective_value": self.objective_value,
            "per_step_beliefs": [b.tolist() for b in self.per_step_beliefs],
            "candidates_considered": self.candidates_considered,
            "truncation_flags": dict(self.truncation_flags),
        }


def _rank_key(value: float, plan: Plan):
    return (-round(value, TIE_DIGITS), plan.cost, plan.actions)


def _candidates(space: ModelSpace, problem: PlanningProblem, config: SynthesisConfig):
    return enumerate_candidate_plans(space.true_model, problem, config.zeta, config.max_plans)


def select_optimal(
    space: ModelSpace,
    problem: PlanningProblem,
    initial_belief: Optional[Belief] = None,
    config: SynthesisConfig = SynthesisConfig(),
) -> SynthesisResult:
    """Cheapest plan under the true model; scored by active explicability for reference."""
    plan = optimal_plan(space.true_model, problem)
    if plan is None:
        raise UnsolvableError("problem unsolvable under the true model")
    if initial_belief is None:
        initial_belief = Belief.uniform(len(space))
    details = active_explicability_details(plan, space, problem, initial_belief, config.params)
    return SynthesisResult(
        "OP", plan, details.score, plan.cost, -float(config.gamma * plan.cost),
        details.beliefs, 1, {"scoring": details.truncated},
    )


def select_explicable(
    space: ModelSpace,
    problem: PlanningProblem,
    initial_belief: Optional[Belief] = None,
    config: SynthesisConfig = SynthesisConfig(),
) -> SynthesisResult:
    """argmax of static explicability under a fixed belief minus gamma * cost."""
    if initial_belief is None:
        initial_belief = Belief.uniform(len(space))
    cands = _candidates(space, problem, config)
    gamma = float(config.gamma)
    best = None
    for plan in cands.plans:
        s = static_explicability(plan, initial_belief, problem, config.zeta, config.beta, config.max_plans, space)
        value = s - gamma * float(plan.cost)
        if best is None or _rank_key(value, plan) < _rank_key(best[0], best[1]):
            best = (value, plan, s)
    value, plan, s = best
    return SynthesisResult(
        "EXP", plan, s, plan.cost, value, [initial_belief], len(cands), {"candidates": cands.truncated},
    )


def score_candidates(space, problem, initial_belief, config: SynthesisConfig):
    """Active explicability details for every true-model candidate plan."""
    cands = _candidates(space, problem, config)
    return cands, [
        (plan, active_explicability_details(plan, space, problem, initial_belief, config.params))
        for plan in cands.plans
    ]


def select_active_explicable(
    space: ModelSpace,
    problem: PlanningProblem,
    initial_belief: Optional[Belief] = None,
    config: SynthesisConfig = SynthesisConfig(),
) -> SynthesisResult:
    """argmax of active explicability minus gamma * cost over the true-model candidates."""
    if initial_belief is None:
        initial_belief = Belief.uniform(len(space))
    cands, scored = score_candidates(space, problem, initial_belief, config)
    gamma = float(config.gamma)
    best = None
    any_trunc = False
    for plan, details in scored:
        any_trunc |= details.truncated
        value = details.score - gamma * float(plan.cost)
        if best is None or _rank_key(value, plan) < _rank_key(best[0], best[1]):
            best = (value, plan, details)
    value, plan, details = best
    return SynthesisResult(
        "ActiveEXP", plan, details.score, plan.cost, value, details.beliefs, len(cands),
        {"candidates": cands.truncated, "scoring": any_trunc},
    )


SELECTORS = {
    "OP": select_optimal,
    "EXP": select_explicable,
    "ActiveEXP": select_active_explicable,
}


def synthesize(space, problem, initial_belief=None, config: SynthesisConfig = SynthesisConfig()) -> SynthesisResult:
    return SELECTORS[config.objective](space, problem, initial_belief, config)
