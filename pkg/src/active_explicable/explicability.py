"""Plan likelihoods, explicability scores and the forward update of the observer's belief.

The observer keeps a belief over a finite model space. Each observed action
is scored against every model by the Boltzmann mass of candidate plans (from
the current state) whose first action matches it. Those likelihoods drive a
two-chain forward recursion: a persistent human-model chain and a per-step
"temporary robot model" that absorbs the observation.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from .core import DomainModel, ModelSpace, Number, Plan, PlanningProblem, State, simulate, to_fraction
from .planner import (
    DEFAULT_MAX_PLANS,
    DEFAULT_ZETA,
    CandidatePlanSet,
    UnsolvableError,
    _enumerate,
)

log = logging.getLogger(__name__)

NORM_TOL = 1e-9
EVIDENCE_FLOOR = 1e-6
DEFAULT_BETA = 1.0
DEFAULT_ALPHA = 0.5
ORACLE_MAX_TERMS = 1 << 24


class EmptySupportError(ValueError):
    pass


class OracleLimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExplicabilityParams:
    zeta: Fraction = DEFAULT_ZETA
    beta: float = DEFAULT_BETA
    alpha: float = DEFAULT_ALPHA
    max_plans: Optional[int] = DEFAULT_MAX_PLANS

    def __post_init__(self):
        object.__setattr__(self, "zeta", to_fraction(self.zeta))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "alpha", float(self.alpha))
        if self.zeta < 1:
            raise ValueError(f"zeta must be >= 1, got {self.zeta}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.max_plans is not None and self.max_plans < 1:
            raise ValueError("max_plans must be positive")

    @property
    def transition(self) -> "BeliefTransition":
        return BeliefTransition(self.alpha)


@dataclass(frozen=True)
class BeliefTransition:
    """P(M_H^t = m | M_H^{t-1} = m', Mbar_R^t = m'') = (1-alpha)[m=m'] + alpha[m=m'']."""

    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    def prob(self, m: int, prev: int, temp: int) -> float:
        return (1.0 - self.alpha) * (m == prev) + self.alpha * (m == temp)


@dataclass(frozen=True, eq=False)
class Belief:
    weights: np.ndarray
    fallback: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("belief must be a non-empty vector")
        if np.any(w < 0) or abs(w.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"belief is not normalized: sum={w.sum()!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int) -> "Belief":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, n: int, index: int) -> "Belief":
        w = np.zeros(n)
        w[index] = 1.0
        return cls(w)

    @classmethod
    def from_unnormalized(cls, values, fallback: bool = False) -> "Belief":
        v = np.asarray(values, dtype=float)
        return cls(v / v.sum(), fallback)

    def __len__(self):
        return self.weights.size

    def __getitem__(self, i):
        return float(self.weights[i])

    def argmax(self) -> int:
        return int(np.argmax(self.weights))

    def tolist(self) -> list:
        return [float(x) for x in self.weights]


@dataclass(frozen=True)
class PlanDistribution:
    candidate_set: CandidatePlanSet
    probabilities: np.ndarray

    def probability(self, actions) -> float:
        i = self.candidate_set.index(actions)
        return 0.0 if i is None else float(self.probabilities[i])


@dataclass(frozen=True)
class ObservationTrace:
    """Observed actions plus the true states they were observed in.

    For a noiseless trace ``states[t+1]`` is the progression of ``states[t]``
    by ``actions[t]``; noisy traces keep the executed states while the
    observed labels may differ.
    """

    actions: tuple
    states: tuple
    corrupted: int = 0
    noop_corruptions: int = 0

    def __len__(self):
        return len(self.actions)

    @classmethod
    def from_plan(cls, model: DomainModel, initial: State, actions: Sequence[str]) -> "ObservationTrace":
        return cls(tuple(actions), tuple(simulate(model, initial, actions)))


def boltzmann_distribution(plans: CandidatePlanSet, beta: Number = DEFAULT_BETA) -> PlanDistribution:
    if len(plans) == 0:
        raise EmptySupportError("Boltzmann distribution over an empty plan set")
    beta = float(beta)
    base = plans.optimal_cost
    # exponents are <= 0 relative to c*, so no overflow
    logits = np.array([-beta * float(p.cost - base) for p in plans.plans])
    logits -= logits.max()
    w = np.exp(logits)
    return PlanDistribution(plans, w / w.sum())


def first_action_consistent(observed_action: str, plan: Plan) -> bool:
    return len(plan.actions) > 0 and plan.actions[0] == observed_action


@lru_cache(maxsize=200_000)
def _first_action_masses(model: DomainModel, state: State, goal: frozenset, zeta: Fraction, beta: float, max_plans):
    try:
        cands = _enumerate(model, state, goal, zeta, max_plans)
    except UnsolvableError:
        return {}, False
    dist = boltzmann_distribution(cands, beta)
    masses = {}
    for p, pr in zip(cands.plans, dist.probabilities):
        if p.actions:
            masses[p.actions[0]] = masses.get(p.actions[0], 0.0) + float(pr)
    return masses, cands.truncated


def first_action_masses(model, state, goal, zeta=DEFAULT_ZETA, beta=DEFAULT_BETA, max_plans=DEFAULT_MAX_PLANS):
    """Boltzmann mass of candidate plans from ``state`` grouped by first action."""
    masses, _ = _first_action_masses(model, frozenset(state), frozenset(goal), to_fraction(zeta), float(beta), max_plans)
    return dict(masses)


def observation_likelihood(
    model: DomainModel,
    state: State,
    observed_action: str,
    goal: frozenset,
    zeta: Number = DEFAULT_ZETA,
    beta: Number = DEFAULT_BETA,
    max_plans: Optional[int] = DEFAULT_MAX_PLANS,
) -> float:
    masses, _ = _first_action_masses(model, frozenset(state), frozenset(goal), to_fraction(zeta), float(beta), max_plans)
    return masses.get(observed_action, 0.0)


def step_likelihoods(space: ModelSpace, state: State, observed_action: str, goal: frozenset, params: ExplicabilityParams):
    """Per-model likelihood of one observation.

    Returns (raw, effective, truncated, fallback): ``effective`` equals ``raw``
    unless every model assigns zero likelihood, in which case a uniform floor
    replaces it so the update stays defined.
    """
    state, goal = frozenset(state), frozenset(goal)
    raw = np.empty(len(space))
    truncated = False
    for i, m in enumerate(space.models):
        masses, trunc = _first_action_masses(m, state, goal, params.zeta, params.beta, params.max_plans)
        raw[i] = masses.get(observed_action, 0.0)
        truncated |= trunc
    if raw.sum() > 0.0:
        return raw, raw, truncated, False
    return raw, np.full(len(space), EVIDENCE_FLOOR), truncated, True


def _forward_step(prior: np.ndarray, lik: np.ndarray, alpha: float) -> np.ndarray:
    # sum_{m'} b(m') sum_{m''} P(m'') [(1-alpha)[m=m'] + alpha[m=m'']] L(m''), with P(m'') = 1/N
    n = prior.size
    return ((1.0 - alpha) * prior * lik.sum() + alpha * lik * prior.sum()) / n


def belief_update(
    prior: Belief,
    space: ModelSpace,
    state: State,
    observed_action: str,
    goal: frozenset,
    transition: BeliefTransition = BeliefTransition(),
    zeta: Number = DEFAULT_ZETA,
    beta: Number = DEFAULT_BETA,
    max_plans: Optional[int] = DEFAULT_MAX_PLANS,
) -> Belief:
    if len(prior) != len(space):
        raise ValueError(f"belief has {len(prior)} entries, space has {len(space)} models")
    params = ExplicabilityParams(zeta, beta, transition.alpha, max_plans)
    _, lik, _, fallback = step_likelihoods(space, state, observed_action, goal, params)
    return Belief.from_unnormalized(_forward_step(prior.weights, lik, transition.alpha), fallback)


def belief_trace(
    initial: Belief,
    space: ModelSpace,
    problem: PlanningProblem,
    trace: ObservationTrace,
    params: ExplicabilityParams = ExplicabilityParams(),
) -> list:
    beliefs = [initial]
    for t, action in enumerate(trace.actions):
        beliefs.append(
            belief_update(
                beliefs[-1], space, trace.states[t], action, problem.goal,
                params.transition, params.zeta, params.beta, params.max_plans,
            )
        )
    return beliefs


def static_explicability(
    plan: Plan,
    model_or_belief: Union[DomainModel, Belief],
    problem: PlanningProblem,
    zeta: Number = DEFAULT_ZETA,
    beta: Number = DEFAULT_BETA,
    max_plans: Optional[int] = DEFAULT_MAX_PLANS,
    space: Optional[ModelSpace] = None,
) -> float:
    """Boltzmann probability of the whole plan within a model's candidate set.

    With a Belief (``space`` required) this is the belief-weighted average.
    A model under which the problem is unsolvable contributes 0.
    """
    if isinstance(model_or_belief, Belief):
        if space is None:
            raise ValueError("a model space is required to score against a belief")
        total = 0.0
        for w, m in zip(model_or_belief.weights, space.models):
            if w > 0.0:
                total += float(w) * static_explicability(plan, m, problem, zeta, beta, max_plans)
        return total
    dist = _plan_distribution(model_or_belief, problem.initial, problem.goal, to_fraction(zeta), float(beta), max_plans)
    if dist is None:
        log.info("problem unsolvable under model %s; contributes 0", model_or_belief.label)
        return 0.0
    return dist.probability(plan.actions)


@lru_cache(maxsize=50_000)
def _plan_distribution(model, start, goal, zeta, beta, max_plans) -> Optional[PlanDistribution]:
    try:
        return boltzmann_distribution(_enumerate(model, start, goal, zeta, max_plans), beta)
    except UnsolvableError:
        return None


@dataclass
class ActiveScore:
    score: float
    step_scores: list
    beliefs: list
    truncated: bool = False
    fallback_steps: list = field(default_factory=list)


def active_explicability_details(
    plan: Plan,
    space: ModelSpace,
    problem: PlanningProblem,
    initial: Belief,
    params: ExplicabilityParams = ExplicabilityParams(),
    trace: Optional[ObservationTrace] = None,
) -> ActiveScore:
    """Per-step explicability averaged over the plan.

    Step t scores the t-th action against candidates regenerated from the
    state it was taken in, weighted by the belief after observing it.
    """
    if trace is None:
        trace = ObservationTrace.from_plan(space.true_model, problem.initial, plan.actions)
    if len(trace) == 0:
        return ActiveScore(1.0, [], [initial])
    beliefs = [initial]
    steps = []
    truncated = False
    fallback_steps = []
    for t, action in enumerate(trace.actions):
        raw, lik, trunc, fb = step_likelihoods(space, trace.states[t], action, problem.goal, params)
        truncated |= trunc
        if fb:
            fallback_steps.append(t + 1)
        b = Belief.from_unnormalized(_forward_step(beliefs[-1].weights, lik, params.alpha), fb)
        beliefs.append(b)
        steps.append(float(np.dot(b.weights, raw)))
    score = math.fsum(steps) / len(steps)
    return ActiveScore(min(1.0, max(0.0, score)), steps, beliefs, truncated, fallback_steps)


def active_explicability(
    plan: Plan,
    space: ModelSpace,
    problem: PlanningProblem,
    initial: Belief,
    params: ExplicabilityParams = ExplicabilityParams(),
) -> float:
    return active_explicability_details(plan, space, problem, initial, params).score


def exact_posterior_oracle(
    space: ModelSpace,
    problem: PlanningProblem,
    trace: ObservationTrace,
    params: ExplicabilityParams = ExplicabilityParams(),
    initial: Optional[Belief] = None,
    max_terms: int = ORACLE_MAX_TERMS,
) -> list:
    """Posterior over the human model at every step by summing the full joint.

    Enumerates every assignment of (M_H^0, Mbar_R^1, M_H^1, ..., Mbar_R^t, M_H^t)
    and marginalizes; exponential in t, meant only to check ``belief_trace``.
    """
    n = len(space)
    T = len(trace)
    if n ** (2 * T + 1) > max_terms:
        raise OracleLimitError(f"{n}^{2 * T + 1} joint assignments exceed the limit of {max_terms}")
    if initial is None:
        initial = Belief.uniform(n)
    trans = params.transition
    cpt = np.array([[[trans.prob(m, prev, temp) for m in range(n)] for temp in range(n)] for prev in range(n)])
    liks, fallbacks = [], []
    for t, action in enumerate(trace.actions):
        _, lik, _, fb = step_likelihoods(space, trace.states[t], action, problem.goal, params)
        liks.append(lik)
        fallbacks.append(fb)
    out = [initial]
    prior_temp = 1.0 / n
    for t in range(1, T + 1):
        # columns: h0, r1, h1, r2, h2, ..., rt, ht
        idx = np.indices((n,) * (2 * t + 1), dtype=np.int16).reshape(2 * t + 1, -1)
        weight = initial.weights[idx[0]].copy()
        for s in range(1, t + 1):
            prev, temp, cur = idx[2 * s - 2], idx[2 * s - 1], idx[2 * s]
            weight *= prior_temp * cpt[prev, temp, cur] * liks[s - 1][temp]
        post = np.bincount(idx[2 * t], weights=weight, minlength=n)
        out.append(Belief.from_unnormalized(post, fallbacks[t - 1]))
    return out


def write_belief_csv(beliefs: Sequence[Belief], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["step", "model_mask", "probability"])
    for t, b in enumerate(beliefs):
        for mask, p in enumerate(b.weights):
            writer.writerow([t, mask, repr(float(p))])


def clear_caches() -> None:
    _first_action_masses.cache_clear()
    _plan_distribution.cache_clear()
