"""Ground 4-operator Blocksworld plus a k=4 feature set over it.

The true model is the plain 4-operator domain (mask 0). Each feature is a
capability an observer might wrongly credit the robot with (or deny it):

* ``move_block_block``: move a clear block from one block onto another
* ``move_to_table``: move a clear block from a block straight to the table
* ``move_from_table``: move a clear block from the table onto a block
* ``no_putdown``: the gripper cannot put a held block on the table

Moves cost the same as a single 4-operator step, so an observer who
believes in them expects shorter plans than the robot executes.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from ..core import DomainModel, GroundAction, ModelFeature, PlanningProblem, build_model_space
from ..planner import optimal_plan

BLOCK_NAMES = "ABCDEF"


def blocks(n: int) -> list:
    if not 3 <= n <= 6:
        raise ValueError(f"n_blocks must be between 3 and 6, got {n}")
    return list(BLOCK_NAMES[:n])


def on(x, y):
    return f"on_{x}_{y}"


def ontable(x):
    return f"ontable_{x}"


def clear(x):
    return f"clear_{x}"


def holding(x):
    return f"holding_{x}"


HANDEMPTY = "handempty"


def fluents(names) -> frozenset:
    fl = {HANDEMPTY}
    for x in names:
        fl |= {ontable(x), clear(x), holding(x)}
        for y in names:
            if x != y:
                fl.add(on(x, y))
    return frozenset(fl)


def base_actions(names) -> list:
    acts = []
    for x in names:
        acts.append(GroundAction(f"pickup_{x}", {ontable(x), clear(x), HANDEMPTY}, {holding(x)},
                                 {ontable(x), clear(x), HANDEMPTY}))
        acts.append(GroundAction(f"putdown_{x}", {holding(x)}, {ontable(x), clear(x), HANDEMPTY}, {holding(x)}))
        for y in names:
            if x == y:
                continue
            acts.append(GroundAction(f"stack_{x}_{y}", {holding(x), clear(y)}, {on(x, y), clear(x), HANDEMPTY},
                                     {holding(x), clear(y)}))
            acts.append(GroundAction(f"unstack_{x}_{y}", {on(x, y), clear(x), HANDEMPTY}, {holding(x), clear(y)},
                                     {on(x, y), clear(x), HANDEMPTY}))
    return acts


def base_model(n_blocks: int) -> DomainModel:
    names = blocks(n_blocks)
    return DomainModel(fluents(names), tuple(base_actions(names)), "base")


MOVE_COST = Fraction(1)
DEFAULT_TRUE_MASK = 0
CONVERGENCE_SEED = 1
COMPARISON_SEED = 2


def move_actions(names, kind: str, cost=MOVE_COST) -> list:
    out = []
    for x, y in itertools.permutations(names, 2):
        if kind == "block_block":
            for z in names:
                if z in (x, y):
                    continue
                out.append(GroundAction(f"move_{x}_{y}_{z}", {on(x, y), clear(x), clear(z), HANDEMPTY},
                                        {on(x, z), clear(y)}, {on(x, y), clear(z)}, cost))
        elif kind == "to_table":
            out.append(GroundAction(f"movetotable_{x}_{y}", {on(x, y), clear(x), HANDEMPTY},
                                    {ontable(x), clear(y)}, {on(x, y)}, cost))
        elif kind == "from_table":
            out.append(GroundAction(f"movefromtable_{x}_{y}", {ontable(x), clear(x), clear(y), HANDEMPTY},
                                    {on(x, y)}, {ontable(x), clear(y)}, cost))
        else:
            raise ValueError(f"unknown move kind {kind!r}")
    return out


def default_features(n_blocks: int) -> list:
    names = blocks(n_blocks)
    return [
        ModelFeature("move_block_block", "add_action", (), move_actions(names, "block_block")),
        ModelFeature("move_to_table", "add_action", (), move_actions(names, "to_table")),
        ModelFeature("move_from_table", "add_action", (), move_actions(names, "from_table")),
        ModelFeature("no_putdown", "remove_action", tuple(f"putdown_{x}" for x in names)),
    ]


def state_from_towers(towers) -> frozenset:
    """Hand-empty state from bottom-to-top towers, e.g. [["A", "B"], ["C"]]."""
    s = {HANDEMPTY}
    for tower in towers:
        s.add(ontable(tower[0]))
        for below, above in zip(tower, tower[1:]):
            s.add(on(above, below))
        s.add(clear(tower[-1]))
    return frozenset(s)


def random_towers(names, rng: random.Random) -> list:
    order = list(names)
    rng.shuffle(order)
    towers = []
    for b in order:
        if towers and rng.random() < 0.5:
            rng.choice(towers).append(b)
        else:
            towers.append([b])
    return sorted(towers)


def goal_from_towers(towers) -> frozenset:
    g = set()
    for tower in towers:
        for below, above in zip(tower, tower[1:]):
            g.add(on(above, below))
    return frozenset(g)


def generate_problems(space, n_blocks: int, count: int, seed: int, min_cost=3, first_cost=None) -> list:
    """Random tower-to-tower problems solvable under the base and the true model.

    Problems whose optimal cost is below ``min_cost`` are skipped; when
    ``first_cost`` is given the first problem kept has exactly that cost.
    """
    rng = random.Random(seed)
    names = blocks(n_blocks)
    out = []
    while len(out) < count:
        start, goal = random_towers(names, rng), random_towers(names, rng)
        problem = PlanningProblem(state_from_towers(start), goal_from_towers(goal))
        true_plan = optimal_plan(space.true_model, problem)
        if true_plan is None or optimal_plan(space.base, problem) is None or true_plan.cost < min_cost:
            continue
        if not out and first_cost is not None and true_plan.cost != first_cost:
            continue
        out.append(problem)
    return out


def build_blocksworld(n_blocks: int = 4, feature_spec=None, n_problems: int = 10, seed: int = CONVERGENCE_SEED,
                      true_mask: int = DEFAULT_TRUE_MASK, **problem_kw):
    """(ModelSpace, problems) over the ground domain with ``n_blocks`` blocks."""
    features = default_features(n_blocks) if feature_spec is None else list(feature_spec)
    space = build_model_space(base_model(n_blocks), features, true_mask)
    return space, generate_problems(space, n_blocks, n_problems, seed, **problem_kw)
