"""Small random STRIPS instances for cross-checking inference against the exact oracle."""

from __future__ import annotations

import random
from fractions import Fraction

from .core import DomainModel, GroundAction, ModelFeature, PlanningProblem, build_model_space, progress

ALPHAS = (0.0, 0.3, 0.7, 1.0)


def random_model(rng: random.Random, n_fluents=5, n_actions=6) -> DomainModel:
    fluents = [f"p{i}" for i in range(n_fluents)]
    actions = []
    for j in range(n_actions):
        pre = set(rng.sample(fluents, rng.randint(0, 2)))
        add = set(rng.sample(fluents, rng.randint(1, 2)))
        delete = set(rng.sample(fluents, rng.randint(0, 2))) - add
        actions.append(GroundAction(f"a{j}", pre, add, delete, Fraction(rng.randint(1, 3))))
    return DomainModel(frozenset(fluents), tuple(actions), "base")


def random_feature(rng: random.Random, model: DomainModel, i: int) -> ModelFeature:
    ids = [a.id for a in model.actions]
    kind = rng.choice(["remove_action", "scale_cost", "set_cost", "add_precondition", "add_action"])
    if kind == "add_action":
        fl = sorted(model.fluents)
        a = GroundAction(f"x{i}", set(rng.sample(fl, 1)), set(rng.sample(fl, 2)), set(), Fraction(rng.randint(1, 2)))
        return ModelFeature(f"f{i}", kind, (), [a])
    target = tuple(rng.sample(ids, rng.randint(1, 2)))
    payload = {
        "remove_action": None,
        "scale_cost": Fraction(rng.choice([1, 2, 3]), 2),
        "set_cost": rng.randint(1, 4),
        "add_precondition": (rng.choice(sorted(model.fluents)),),
    }[kind]
    return ModelFeature(f"f{i}", kind, target, payload)


def random_instance(rng: random.Random, max_features=2, max_len=3):
    """(space, problem, trace, alpha) with |M| <= 2**max_features and len(trace) <= max_len.

    Features touch disjoint actions so every mask applies cleanly. The trace is
    a random walk under the true model; the goal is a subset of a state it can
    reach, so the problem is solvable under the true model.
    """
    from .explicability import ObservationTrace

    while True:
        base = random_model(rng)
        k = rng.randint(0, max_features)
        features, used = [], set()
        for i in range(k):
            f = random_feature(rng, base, i)
            if used & set(f.target):
                continue
            used |= set(f.target)
            features.append(f)
        space = build_model_space(base, features, rng.randrange(2 ** len(features)))
        init = frozenset(rng.sample(sorted(base.fluents), 2))
        state, walk = init, []
        for _ in range(rng.randint(1, max_len)):
            options = space.true_model.applicable(state)
            if not options:
                break
            a = rng.choice(options)
            walk.append(a.id)
            state = progress(state, a)
        if not walk:
            continue
        reach = sorted(state)
        goal = frozenset(rng.sample(reach, min(len(reach), rng.randint(1, 2))))
        problem = PlanningProblem(init, goal)
        trace = ObservationTrace.from_plan(space.true_model, init, walk)
        return space, problem, trace, rng.choice(ALPHAS)
