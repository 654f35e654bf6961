"""Ground STRIPS models, progression semantics and feature-induced model spaces."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

Number = Union[int, float, str, Fraction]
State = frozenset

MAX_FEATURES = 10

FEATURE_KINDS = (
    "remove_action",
    "add_action",
    "scale_cost",
    "set_cost",
    "add_precondition",
    "remove_precondition",
)


class DomainError(ValueError):
    """Raised when a model, action or feature violates its invariants."""


class PreconditionError(DomainError):
    pass


def to_fraction(value: Number) -> Fraction:
    """Exact rational from int/str/Fraction; floats go through their shortest repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError(f"not a number: {value!r}")
    if isinstance(value, float):
        return Fraction(repr(value))
    try:
        return Fraction(value)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"not a rational number: {value!r}") from exc


@dataclass(frozen=True)
class GroundAction:
    id: str
    pre: frozenset = frozenset()
    add: frozenset = frozenset()
    delete: frozenset = frozenset()
    cost: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "pre", frozenset(self.pre))
        object.__setattr__(self, "add", frozenset(self.add))
        object.__setattr__(self, "delete", frozenset(self.delete))
        object.__setattr__(self, "cost", to_fraction(self.cost))
        if self.add & self.delete:
            raise DomainError(
                f"action {self.id}: add and delete effects overlap on {sorted(self.add & self.delete)}"
            )
        if self.cost < 0:
            raise DomainError(f"action {self.id}: negative cost {self.cost}")

    @property
    def fluents(self) -> frozenset:
        return self.pre | self.add | self.delete


@dataclass(frozen=True)
class PlanningProblem:
    initial: State
    goal: frozenset

    def __post_init__(self):
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "goal", frozenset(self.goal))


@dataclass(frozen=True)
class DomainModel:
    """One point of the model space: fluents plus ground actions.

    Actions are kept sorted by id, which fixes successor order everywhere.
    Hashing is cached because models key the planner caches.
    """

    fluents: frozenset
    actions: tuple
    label: str = "base"

    def __post_init__(self):
        object.__setattr__(self, "fluents", frozenset(self.fluents))
        acts = tuple(sorted(self.actions, key=lambda a: a.id))
        object.__setattr__(self, "actions", acts)
        seen = set()
        for a in acts:
            if a.id in seen:
                raise DomainError(f"duplicate action id {a.id!r}")
            seen.add(a.id)
            missing = a.fluents - self.fluents
            if missing:
                raise DomainError(f"action {a.id} references unknown fluents {sorted(missing)}")

    def __hash__(self):
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash((self.fluents, self.actions))

    @cached_property
    def action_map(self) -> Mapping[str, GroundAction]:
        return {a.id: a for a in self.actions}

    def action(self, action_id: str) -> GroundAction:
        try:
            return self.action_map[action_id]
        except KeyError:
            raise KeyError(f"unknown action {action_id!r} in model {self.label!r}") from None

    def applicable(self, state: State) -> list:
        """Applicable actions in id order."""
        return [a for a in self.actions if a.pre <= state]

    def check_problem(self, problem: PlanningProblem) -> None:
        unknown = (problem.initial | problem.goal) - self.fluents
        if unknown:
            raise DomainError(f"problem references unknown fluents {sorted(unknown)}")


def is_applicable(model: DomainModel, state: State, action_id: str) -> bool:
    return model.action(action_id).pre <= state


def progress(state: State, action: GroundAction) -> State:
    return (state - action.delete) | action.add


def apply_action(model: DomainModel, state: State, action_id: str) -> State:
    action = model.action(action_id)
    if not action.pre <= state:
        missing = sorted(action.pre - state)
        raise PreconditionError(f"{action_id} not applicable: missing {missing}")
    return progress(state, action)


@dataclass(frozen=True)
class Plan:
    actions: tuple = ()
    cost: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "cost", to_fraction(self.cost))

    def __len__(self):
        return len(self.actions)

    @classmethod
    def from_actions(cls, model: DomainModel, actions: Iterable[str]) -> "Plan":
        actions = tuple(actions)
        return cls(actions, sum((model.action(a).cost for a in actions), Fraction(0)))


def simulate(model: DomainModel, initial: State, actions: Sequence[str]) -> list:
    """State sequence s_0..s_T; raises on the first inapplicable action."""
    states = [frozenset(initial)]
    for a in actions:
        states.append(apply_action(model, states[-1], a))
    return states


def validate_plan(model: DomainModel, problem: PlanningProblem, plan: Plan) -> bool:
    state = problem.initial
    total = Fraction(0)
    for a in plan.actions:
        action = model.action_map.get(a)
        if action is None or not action.pre <= state:
            return False
        state = progress(state, action)
        total += action.cost
    return problem.goal <= state and total == plan.cost


@dataclass(frozen=True)
class ModelFeature:
    """A named transformation of a model.

    ``target`` is a tuple of action ids. ``payload`` depends on ``kind``:
    a list of action specs (add_action), a factor (scale_cost), a cost or an
    {action_id: cost} mapping (set_cost), or a tuple of fluents
    (add_precondition / remove_precondition).
    """

    id: str
    kind: str
    target: tuple = ()
    payload: object = None

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise DomainError(f"feature {self.id}: unknown kind {self.kind!r}")
        target = (self.target,) if isinstance(self.target, str) else tuple(self.target or ())
        object.__setattr__(self, "target", target)

    def apply(self, model: DomainModel) -> DomainModel:
        actions = dict(model.action_map)
        for t in self.target:
            if t not in actions and self.kind != "add_action":
                raise DomainError(f"feature {self.id}: target action {t!r} not in model")
        if self.kind == "remove_action":
            for t in self.target:
                del actions[t]
        elif self.kind == "add_action":
            for spec in self.payload:
                a = spec if isinstance(spec, GroundAction) else action_from_dict(spec)
                if a.id in actions:
                    raise DomainError(f"feature {self.id}: action {a.id!r} already present")
                actions[a.id] = a
        elif self.kind == "scale_cost":
            factor = to_fraction(self.payload)
            if factor < 0:
                raise DomainError(f"feature {self.id}: negative cost factor")
            for t in self.target:
                actions[t] = replace(actions[t], cost=actions[t].cost * factor)
        elif self.kind == "set_cost":
            for t in self.target:
                value = self.payload[t] if isinstance(self.payload, Mapping) else self.payload
                actions[t] = replace(actions[t], cost=to_fraction(value))
        else:
            fl = frozenset((self.payload,) if isinstance(self.payload, str) else self.payload)
            for t in self.target:
                pre = actions[t].pre | fl if self.kind == "add_precondition" else actions[t].pre - fl
                actions[t] = replace(actions[t], pre=pre)
        return DomainModel(model.fluents, tuple(actions.values()), model.label)


def action_from_dict(spec: Mapping) -> GroundAction:
    return GroundAction(
        id=spec["id"],
        pre=frozenset(spec.get("pre", ())),
        add=frozenset(spec.get("add", ())),
        delete=frozenset(spec.get("del", ())),
        cost=to_fraction(spec.get("cost", 1)),
    )


def action_to_dict(a: GroundAction) -> dict:
    return {
        "id": a.id,
        "pre": sorted(a.pre),
        "add": sorted(a.add),
        "del": sorted(a.delete),
        "cost": str(a.cost),
    }


def mask_label(mask: int, k: int) -> str:
    return format(mask, f"0{k}b") if k else "-"


@dataclass(frozen=True)
class ModelSpace:
    """All 2^k models reachable by toggling ``features`` on ``base``.

    Bit i of a mask switches on ``features[i]``; features are applied in list
    order regardless of the mask.
    """

    base: DomainModel
    features: tuple
    true_mask: int = 0
    models: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        k = len(self.features)
        if not 0 <= self.true_mask < 2**k:
            raise DomainError(f"true_mask {self.true_mask} out of range for k={k}")
        models = []
        for mask in range(2**k):
            m = self.base
            for i, feat in enumerate(self.features):
                if mask >> i & 1:
                    m = feat.apply(m)
            models.append(replace(m, label=mask_label(mask, k)))
        object.__setattr__(self, "models", tuple(models))

    @property
    def k(self) -> int:
        return len(self.features)

    def __len__(self):
        return len(self.models)

    @property
    def true_model(self) -> DomainModel:
        return self.models[self.true_mask]

    def model(self, mask: int) -> DomainModel:
        return self.models[mask]


def build_model_space(
    base: DomainModel, features: Sequence[ModelFeature], true_mask: int = 0, max_features: int = MAX_FEATURES
) -> ModelSpace:
    if len(features) > max_features:
        raise DomainError(f"{len(features)} features exceed the cap of {max_features}")
    return ModelSpace(base, tuple(features), true_mask)
