import itertools
import json
from fractions import Fraction

import pytest

from active_explicable.domainfile import DomainFileError, domain_to_dict, load_domain, parse_domain
from active_explicable.domains import blocksworld as bw
from active_explicable.domains import taxi
from active_explicable.experiments import BUILTIN_DOMAINS
from active_explicable.planner import optimal_plan


def test_blocks_range():
    with pytest.raises(ValueError):
        bw.blocks(2)
    with pytest.raises(ValueError):
        bw.blocks(7)
    assert bw.blocks(6) == list("ABCDEF")


def test_blocksworld_problems_solvable_under_every_relevant_model():
    space, problems = bw.build_blocksworld(4, n_problems=10)
    assert len(problems) == 10
    for p in problems:
        assert optimal_plan(space.base, p) is not None
        assert optimal_plan(space.true_model, p).cost >= 3


def test_blocksworld_build_is_seeded():
    a = bw.build_blocksworld(4, n_problems=3, seed=7)[1]
    b = bw.build_blocksworld(4, n_problems=3, seed=7)[1]
    assert a == b


def test_comparison_first_problem_costs_four():
    space, problems = load_domain(BUILTIN_DOMAINS["blocksworld-comparison"])[:2]
    assert len(problems) == 4
    assert optimal_plan(space.true_model, problems[0]).cost == 4


def test_move_features_shorten_plans():
    space, problems = bw.build_blocksworld(4, n_problems=3)
    moves = space.model(0b0111)
    for p in problems:
        assert optimal_plan(moves, p).cost < optimal_plan(space.true_model, p).cost


def _schedule_values(spec, heavy):
    """Independent payoff of every ordered 4-guest schedule from the grid geometry."""
    unit = Fraction(spec["unit_cost"])
    cong = Fraction(spec["congestion"])
    out = {}
    for order in itertools.permutations(taxi.GUESTS, 4):
        total = Fraction(0)
        for slot, g in enumerate(order):
            info = spec["guests"][g]
            dist = abs(info["pos"][0] - spec["depot"][0]) + abs(info["pos"][1] - spec["depot"][1])
            travel = 2 * unit * dist * (1 + cong * slot)
            if heavy and info["color"] == "red":
                travel *= Fraction(spec["heavy_factor"])
            total += spec["rewards"][info["color"]] - travel
        out[order] = total
    return out


def test_taxi_two_models():
    space, problems = taxi.build_taxi()
    assert space.k == 1 and len(space) == 2
    assert space.true_mask == 1
    assert len(problems) == 1


def test_taxi_light_traffic_favours_far_guests():
    space, (problem,) = taxi.build_taxi()
    values = _schedule_values(taxi.DEFAULT_GRID, heavy=False)
    best = max(values.values())
    plan = optimal_plan(space.model(0), problem)
    guests = tuple(taxi.guests_of(plan.actions))
    assert values[guests] == best
    assert all(taxi.DEFAULT_GRID["guests"][g]["color"] == "red" for g in guests)


def test_taxi_heavy_traffic_favours_near_guests():
    space, (problem,) = taxi.build_taxi()
    values = _schedule_values(taxi.DEFAULT_GRID, heavy=True)
    plan = optimal_plan(space.true_model, problem)
    guests = tuple(taxi.guests_of(plan.actions))
    assert values[guests] == max(values.values())
    assert taxi.payoff(taxi.DEFAULT_GRID, guests) == values[guests]
    greens = sum(taxi.DEFAULT_GRID["guests"][g]["color"] == "green" for g in guests)
    assert greens >= 2


def test_taxi_cost_is_offset_minus_payoff():
    space, (problem,) = taxi.build_taxi()
    values = _schedule_values(taxi.DEFAULT_GRID, heavy=True)
    plan = optimal_plan(space.true_model, problem)
    offset = Fraction(taxi.DEFAULT_GRID["offset"])
    assert plan.cost == 4 * offset - values[tuple(taxi.guests_of(plan.actions))]


def test_taxi_grid_validation():
    bad = dict(taxi.DEFAULT_GRID, offset=0)
    with pytest.raises(ValueError):
        taxi.build_taxi(bad)
    with pytest.raises(ValueError):
        taxi.validate_grid(dict(taxi.DEFAULT_GRID, guests={}))


@pytest.mark.parametrize("name", sorted(BUILTIN_DOMAINS))
def test_shipped_files_roundtrip(name):
    text = BUILTIN_DOMAINS[name].read_text()
    space, problems, label = parse_domain(text)
    again = json.dumps(domain_to_dict(space, problems, label), indent=1) + "\n"
    assert again == text


def test_shipped_files_match_builders():
    space, problems, _ = load_domain(BUILTIN_DOMAINS["blocksworld"])
    ref_space, ref_problems = bw.build_blocksworld(4)
    assert problems == ref_problems
    assert [m.actions for m in space.models] == [m.actions for m in ref_space.models]


MINIMAL = """{
 "schema_version": 1,
 "fluents": ["p", "g"],
 "actions": [
  {"id": "a", "pre": ["p"], "add": ["g"], "cost": "3/2"}
 ],
 "problems": [{"initial": ["p"], "goal": ["g"]}]
}
"""


def test_minimal_domain_parses():
    space, problems, _ = parse_domain(MINIMAL)
    assert len(space) == 1
    assert optimal_plan(space.true_model, problems[0]).cost == Fraction(3, 2)


@pytest.mark.parametrize(
    "old,new,line",
    [
        ('"cost": "3/2"', '"cost": "3/2", "speed": 1', 5),
        ('"cost": "3/2"', '"cost": "x"', 5),
        ('"goal": ["g"]', '"goal": ["zz"]', 7),
        ('"schema_version": 1', '"schema_version": 2', 2),
        ('"pre": ["p"]', '"pre": ["nope"]', 4),
    ],
)
def test_domain_errors_point_at_lines(old, new, line):
    with pytest.raises(DomainFileError) as err:
        parse_domain(MINIMAL.replace(old, new), "dom.json")
    assert err.value.line == line
    assert str(err.value).startswith("dom.json: line")


def test_malformed_json_reports_line():
    with pytest.raises(DomainFileError) as err:
        parse_domain(MINIMAL.replace('"g"]', '"g"', 1))
    # the unclosed list on line 3 is detected at the next token
    assert err.value.line == 4


def test_missing_file():
    with pytest.raises(DomainFileError):
        load_domain("/nonexistent/domain.json")
