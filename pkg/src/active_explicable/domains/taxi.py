"""Taxi pickup scheduling: serve four of eight guests from the convention center.

Each action serves one guest with a round trip from the depot. Action cost is
``offset - reward + travel`` so that cheaper plans pay more; the offset keeps
costs non-negative and is identical for every action, hence shifts every
schedule of four guests by the same amount. Traffic builds up over the
morning: the k-th trip (0-based) has its travel multiplied by
``1 + congestion * k``. A hidden traffic feature additionally scales the
travel of far (red) guests.
"""

from __future__ import annotations

from fractions import Fraction

from ..core import DomainModel, GroundAction, ModelFeature, PlanningProblem, build_model_space, to_fraction

GUESTS = "ABCDEFGH"
SCHEDULE_LENGTH = 4

# Far guests A, B, G, H pay double. Distances are Manhattan cells from CC.
# The offset is large enough that every 4-guest schedule fits under zeta = 1.3.
DEFAULT_GRID = {
    "depot": [0, 0],
    "guests": {
        "A": {"pos": [-8, -6], "color": "red"},
        "B": {"pos": [4, -3], "color": "red"},
        "C": {"pos": [3, 2], "color": "green"},
        "D": {"pos": [-5, 3], "color": "green"},
        "E": {"pos": [-2, -7], "color": "green"},
        "F": {"pos": [2, -5], "color": "green"},
        "G": {"pos": [6, 4], "color": "red"},
        "H": {"pos": [-9, 6], "color": "red"},
    },
    "unit_cost": "1/20",
    "rewards": {"red": 4, "green": 2},
    "heavy_factor": "5/2",
    "congestion": "1/5",
    "offset": 20,
}


def served(g):
    return f"served_{g}"


def waiting(g):
    return f"waiting_{g}"


def count(k):
    return f"count_{k}"


def serve_id(g, k):
    return f"serve_{g}_{k + 1}"


def travel(spec, g) -> Fraction:
    dx, dy = spec["depot"]
    x, y = spec["guests"][g]["pos"]
    return to_fraction(spec["unit_cost"]) * 2 * (abs(x - dx) + abs(y - dy))


def net_value(spec, g, heavy: bool, slot: int = 0) -> Fraction:
    info = spec["guests"][g]
    t = travel(spec, g) * (1 + to_fraction(spec.get("congestion", 0)) * slot)
    if heavy and info["color"] == "red":
        t *= to_fraction(spec["heavy_factor"])
    return to_fraction(spec["rewards"][info["color"]]) - t


def payoff(spec, guests, heavy: bool = True) -> Fraction:
    """Total reward minus travel for guests served in the given order."""
    return sum((net_value(spec, g, heavy, k) for k, g in enumerate(guests)), Fraction(0))


def guests_of(plan_actions) -> list:
    return [a.split("_")[1] for a in plan_actions]


def validate_grid(spec) -> None:
    guests = spec.get("guests", {})
    if sorted(guests) != list(GUESTS):
        raise ValueError(f"grid must define guests {', '.join(GUESTS)}")
    for g, info in guests.items():
        if info.get("color") not in ("red", "green"):
            raise ValueError(f"guest {g}: color must be red or green")
    if to_fraction(spec["heavy_factor"]) < 1:
        raise ValueError("heavy_factor must be >= 1")
    for g in GUESTS:
        for heavy in (False, True):
            if to_fraction(spec["offset"]) - net_value(spec, g, heavy, 0) < 0:
                raise ValueError("offset too small: an action cost would be negative")


def build_taxi(grid_spec=None):
    """(ModelSpace, problems) with masks 0 = light traffic, 1 = heavy traffic (true)."""
    spec = dict(DEFAULT_GRID if grid_spec is None else grid_spec)
    validate_grid(spec)
    offset = to_fraction(spec["offset"])
    fl = {count(k) for k in range(SCHEDULE_LENGTH + 1)}
    for g in GUESTS:
        fl |= {served(g), waiting(g)}
    actions = []
    for g in GUESTS:
        for k in range(SCHEDULE_LENGTH):
            actions.append(GroundAction(
                serve_id(g, k),
                {waiting(g), count(k)},
                {served(g), count(k + 1)},
                {waiting(g), count(k)},
                offset - net_value(spec, g, False, k),
            ))
    base = DomainModel(frozenset(fl), tuple(actions), "light")
    heavy_costs = {
        serve_id(g, k): str(offset - net_value(spec, g, True, k))
        for g in GUESTS if spec["guests"][g]["color"] == "red"
        for k in range(SCHEDULE_LENGTH)
    }
    feature = ModelFeature("heavy_traffic", "set_cost", tuple(sorted(heavy_costs)), heavy_costs)
    space = build_model_space(base, [feature], true_mask=1)
    problem = PlanningProblem(frozenset({count(0)} | {waiting(g) for g in GUESTS}), frozenset({count(SCHEDULE_LENGTH)}))
    return space, [problem]
