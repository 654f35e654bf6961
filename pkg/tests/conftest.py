import itertools
from fractions import Fraction

import pytest

from active_explicable import explicability, planner
from active_explicable.core import DomainModel, GroundAction, ModelFeature, PlanningProblem, build_model_space, progress


@pytest.fixture(autouse=True)
def _fresh_caches():
    planner.clear_caches()
    explicability.clear_caches()
    yield


def act(id, pre=(), add=(), delete=(), cost=1):
    return GroundAction(id, frozenset(pre), frozenset(add), frozenset(delete), Fraction(cost))


def two_route_space():
    """s0 -a-> s1 -b-> g (cost 2) or s0 -c-> g (cost 3); feature 'no_b' removes b.

    Mask 0 keeps b and is the true model.
    """
    base = DomainModel(
        frozenset({"s0", "s1", "g"}),
        (
            act("a", {"s0"}, {"s1"}, {"s0"}, 1),
            act("b", {"s1"}, {"g"}, {"s1"}, 1),
            act("c", {"s0"}, {"g"}, {"s0"}, 3),
        ),
    )
    space = build_model_space(base, [ModelFeature("no_b", "remove_action", ("b",))], true_mask=0)
    return space, PlanningProblem(frozenset({"s0"}), frozenset({"g"}))


def reachable_states(model, initial):
    """Plain BFS over the state graph."""
    seen = {initial}
    frontier = [initial]
    while frontier:
        nxt = []
        for s in frontier:
            for a in model.actions:
                if a.pre <= s:
                    t = (s - a.delete) | a.add
                    if t not in seen:
                        seen.add(t)
                        nxt.append(t)
        frontier = nxt
    return seen


def brute_force_min_cost(model, problem):
    """Bellman-Ford style relaxation over every reachable state (no priority queue)."""
    states = list(reachable_states(model, problem.initial))
    dist = {s: None for s in states}
    dist[problem.initial] = Fraction(0)
    changed = True
    while changed:
        changed = False
        for s in states:
            if dist[s] is None or problem.goal <= s:
                continue
            for a in model.actions:
                if a.pre <= s:
                    t = (s - a.delete) | a.add
                    d = dist[s] + a.cost
                    if dist[t] is None or d < dist[t]:
                        dist[t] = d
                        changed = True
    goals = [d for s, d in dist.items() if d is not None and problem.goal <= s]
    return min(goals) if goals else None


def brute_force_plans(model, problem, bound):
    """Every path that never repeats a state, stops at its first goal state and
    costs at most ``bound``. Only the running cost is used to cut branches."""
    out = []

    def rec(state, path, visited, cost):
        if problem.goal <= state:
            out.append((tuple(path), cost))
            return
        for a in model.actions:
            if not a.pre <= state:
                continue
            c = cost + a.cost
            if c > bound:
                continue
            t = (state - a.delete) | a.add
            if t in visited:
                continue
            path.append(a.id)
            visited.add(t)
            rec(t, path, visited, c)
            visited.discard(t)
            path.pop()

    rec(problem.initial, [], {problem.initial}, Fraction(0))
    return sorted(out)


def all_sequences_upto(model, problem, depth):
    """Every applicable action sequence up to ``depth`` reaching the goal (no pruning)."""
    found = []
    for n in range(depth + 1):
        for seq in itertools.product(model.actions, repeat=n):
            s = problem.initial
            states = [s]
            ok = True
            for i, a in enumerate(seq):
                if problem.goal <= s or not a.pre <= s:
                    ok = False
                    break
                s = progress(s, a)
                states.append(s)
            if ok and problem.goal <= s and len(set(states)) == len(states):
                found.append((tuple(a.id for a in seq), sum((a.cost for a in seq), Fraction(0))))
    return sorted(found)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance PASS/FAIL lines at the end of the run."""
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
