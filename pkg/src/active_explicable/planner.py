"""Optimal planning and enumeration of cost-bounded candidate plan sets."""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .core import DomainModel, Number, Plan, PlanningProblem, State, progress, to_fraction

DEFAULT_ZETA = Fraction(11, 10)
DEFAULT_MAX_PLANS = 1000
DEFAULT_MAX_EXPANSIONS = 500_000


class UnsolvableError(RuntimeError):
    """No plan reaches the goal under the model."""


class PlanningBudgetExceeded(RuntimeError):
    """The search ran out of its expansion budget before deciding solvability."""


@dataclass(frozen=True)
class CandidatePlanSet:
    plans: tuple
    optimal_cost: Fraction
    zeta: Fraction
    truncated: bool = False

    def __len__(self):
        return len(self.plans)

    def __iter__(self):
        return iter(self.plans)

    @property
    def bound(self) -> Fraction:
        return self.zeta * self.optimal_cost

    def index(self, actions) -> Optional[int]:
        return self._positions.get(tuple(actions))

    @property
    def _positions(self):
        pos = self.__dict__.get("_pos")
        if pos is None:
            pos = {p.actions: i for i, p in enumerate(self.plans)}
            object.__setattr__(self, "_pos", pos)
        return pos


def optimal_plan(
    model: DomainModel, problem: PlanningProblem, max_expansions: int = DEFAULT_MAX_EXPANSIONS
) -> Optional[Plan]:
    """Uniform-cost search with duplicate detection.

    Returns None when the goal is unreachable. Ties on g are broken by the
    lexicographic order of the action sequence, so the result is deterministic.
    """
    start = problem.initial
    goal = problem.goal
    counter = itertools.count()
    frontier = [(Fraction(0), (), next(counter), start)]
    best = {start: Fraction(0)}
    closed = set()
    expansions = 0
    while frontier:
        g, path, _, state = heapq.heappop(frontier)
        if state in closed:
            continue
        if goal <= state:
            return Plan(path, g)
        closed.add(state)
        expansions += 1
        if expansions > max_expansions:
            raise PlanningBudgetExceeded(f"more than {max_expansions} expansions")
        for a in model.applicable(state):
            nxt = progress(state, a)
            if nxt in closed:
                continue
            ng = g + a.cost
            if ng < best.get(nxt, ng + 1):
                best[nxt] = ng
                heapq.heappush(frontier, (ng, path + (a.id,), next(counter), nxt))
            elif ng == best[nxt]:
                # equal cost: keep the lexicographically smaller path too; the heap orders them
                heapq.heappush(frontier, (ng, path + (a.id,), next(counter), nxt))
    return None


def cost_to_go(model: DomainModel, start: State, goal: frozenset, max_states: int = DEFAULT_MAX_EXPANSIONS) -> dict:
    """Exact optimal cost-to-go for every state reachable from ``start``.

    Builds the reachable graph, then runs Dijkstra backwards from the goal
    states. Unreachable-goal states are absent from the result.
    """
    succ = {}
    order = [start]
    seen = {start}
    i = 0
    while i < len(order):
        s = order[i]
        i += 1
        edges = []
        for a in model.applicable(s):
            t = progress(s, a)
            edges.append((a, t))
            if t not in seen:
                seen.add(t)
                order.append(t)
                if len(order) > max_states:
                    raise PlanningBudgetExceeded(f"more than {max_states} reachable states")
        succ[s] = edges
    pred = {s: [] for s in order}
    for s, edges in succ.items():
        for a, t in edges:
            pred[t].append((a.cost, s))
    dist = {}
    counter = itertools.count()
    heap = [(Fraction(0), next(counter), s) for s in order if goal <= s]
    while heap:
        d, _, s = heapq.heappop(heap)
        if s in dist:
            continue
        dist[s] = d
        for c, p in pred[s]:
            if p not in dist:
                heapq.heappush(heap, (d + c, next(counter), p))
    return dist


def enumerate_candidate_plans(
    model: DomainModel,
    problem: PlanningProblem,
    zeta: Number = DEFAULT_ZETA,
    max_plans: Optional[int] = DEFAULT_MAX_PLANS,
) -> CandidatePlanSet:
    """All acyclic plans with cost <= zeta * c*, in lexicographic DFS order.

    A plan stops at the first goal state it reaches and never revisits a state
    of its own trajectory. Branches whose exact cost-to-go already exceeds the
    bound are cut, which does not change the resulting set.
    """
    return _enumerate(model, problem.initial, problem.goal, to_fraction(zeta), max_plans)


@lru_cache(maxsize=200_000)
def _enumerate(model, start, goal, zeta, max_plans) -> CandidatePlanSet:
    if zeta < 1:
        raise ValueError(f"zeta must be >= 1, got {zeta}")
    h = cost_to_go(model, start, goal)
    if start not in h:
        raise UnsolvableError(f"goal unreachable under model {model.label}")
    c_star = h[start]
    bound = zeta * c_star
    plans = []
    truncated = False
    path = []
    on_path = {start}

    def dfs(state, g):
        nonlocal truncated
        if goal <= state:
            plans.append(Plan(tuple(path), g))
            if max_plans is not None and len(plans) >= max_plans:
                truncated = True
            return
        for a in model.applicable(state):
            nxt = progress(state, a)
            if nxt in on_path:
                continue
            ng = g + a.cost
            rest = h.get(nxt)
            if rest is None or ng + rest > bound:
                continue
            path.append(a.id)
            on_path.add(nxt)
            dfs(nxt, ng)
            on_path.discard(nxt)
            path.pop()
            if truncated:
                return

    dfs(start, Fraction(0))
    return CandidatePlanSet(tuple(plans), c_star, zeta, truncated)


def clear_caches() -> None:
    _enumerate.cache_clear()
