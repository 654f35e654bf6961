"""Synthetic evaluation: belief convergence, noise robustness and objective comparison."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .core import ModelSpace, to_fraction
from .domainfile import load_domain
from .explicability import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    Belief,
    ObservationTrace,
    active_explicability_details,
    belief_trace,
)
from .planner import DEFAULT_MAX_PLANS, DEFAULT_ZETA, UnsolvableError
from .synthesis import DEFAULT_GAMMA, SynthesisConfig, parse_objective, synthesize

log = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"
BUILTIN_DOMAINS = {
    "blocksworld": DATA_DIR / "blocksworld.json",
    "blocksworld-comparison": DATA_DIR / "blocksworld_comparison.json",
    "taxi": DATA_DIR / "taxi.json",
}
SCHEMA_VERSION = 1


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class NoiseModel:
    level: float
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.level <= 1.0:
            raise ValueError(f"noise level must lie in [0, 1], got {self.level}")


def corrupt_trace(trace: ObservationTrace, model, noise: NoiseModel) -> ObservationTrace:
    """Replace each observed action, with probability ``noise.level``, by another applicable one.

    The executed states are kept: the observer sees the true state but a wrong
    action label. Two uniforms are drawn per step whatever the level, so the
    same seed corrupts nested sets of steps as the level grows.
    """
    rng = np.random.default_rng(noise.rng_seed)
    actions = []
    corrupted = noop = 0
    for t, a in enumerate(trace.actions):
        u, r = rng.random(2)
        if u >= noise.level:
            actions.append(a)
            continue
        alternatives = [b.id for b in model.applicable(trace.states[t]) if b.id != a]
        if not alternatives:
            noop += 1
            actions.append(a)
            continue
        corrupted += 1
        actions.append(alternatives[int(r * len(alternatives))])
    return ObservationTrace(tuple(actions), trace.states, corrupted, noop)


@dataclass(frozen=True)
class ExperimentConfig:
    domain: str = "blocksworld"
    problems: Optional[tuple] = None
    zeta: str = str(DEFAULT_ZETA)
    beta: float = DEFAULT_BETA
    alpha: float = DEFAULT_ALPHA
    gamma: str = str(DEFAULT_GAMMA)
    max_plans: Optional[int] = DEFAULT_MAX_PLANS
    noise_levels: tuple = (0.0,)
    seeds: tuple = (0,)
    carry_belief: bool = True
    objective: str = "ActiveEXP"
    initial_belief: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "zeta", str(to_fraction(self.zeta)))
        object.__setattr__(self, "gamma", str(to_fraction(self.gamma)))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "objective", parse_objective(self.objective))
        object.__setattr__(self, "noise_levels", tuple(float(x) for x in self.noise_levels))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.problems is not None:
            object.__setattr__(self, "problems", tuple(int(i) for i in self.problems))
        if self.initial_belief is not None:
            object.__setattr__(self, "initial_belief", tuple(float(x) for x in self.initial_belief))
        for level in self.noise_levels:
            NoiseModel(level)
        self.synthesis  # validates shared parameter ranges

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known - {"schema_version"}
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**{k: v for k, v in doc.items() if k in known})

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("problems", "noise_levels", "seeds", "initial_belief"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d

    def digest(self, kind: str = "") -> str:
        blob = json.dumps({"kind": kind, **self.to_dict()}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    @property
    def synthesis(self) -> SynthesisConfig:
        return SynthesisConfig(self.gamma, self.zeta, self.beta, self.alpha, self.max_plans, self.objective)


@dataclass
class ExperimentResult:
    kind: str
    config: ExperimentConfig
    belief_traces: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    summary: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def manifest(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "config": self.config.to_dict(),
            "config_hash": self.config.digest(self.kind),
            "summary": self.summary,
            "metadata": self.metadata,
        }


def resolve_domain(name: str):
    path = BUILTIN_DOMAINS.get(name, name)
    space, problems, _ = load_domain(path)
    return space, problems


def _select_problems(problems, config):
    if config.problems is None:
        return list(enumerate(problems))
    return [(i, problems[i]) for i in config.problems]


def _initial(space: ModelSpace, config: ExperimentConfig) -> Belief:
    if config.initial_belief is None:
        return Belief.uniform(len(space))
    return Belief(np.array(config.initial_belief))


def _executed_plans(space, chosen, config):
    """Plan per problem under the configured objective, belief carried forward.

    The robot predicts the observer's belief with noiseless observations; the
    returned traces are the executed ones.
    """
    synth = config.synthesis
    belief = _initial(space, config)
    out = []
    for idx, problem in chosen:
        try:
            result = synthesize(space, problem, belief, synth)
        except UnsolvableError:
            raise ExperimentError(f"problem {idx} is unsolvable under the true model") from None
        trace = ObservationTrace.from_plan(space.true_model, problem.initial, result.plan.actions)
        beliefs = belief_trace(belief, space, problem, trace, synth.params)
        out.append((idx, problem, result, trace, beliefs))
        if config.carry_belief:
            belief = beliefs[-1]
        else:
            belief = _initial(space, config)
    return out


def run_convergence(config: ExperimentConfig) -> ExperimentResult:
    space, problems = resolve_domain(config.domain)
    chosen = _select_problems(problems, config)
    if len(chosen) < 1:
        raise ExperimentError("convergence needs at least one problem")
    executed = _executed_plans(space, chosen, config)
    rows = []
    summary = []
    step = 0
    first = True
    for idx, problem, result, trace, beliefs in executed:
        for t, b in enumerate(beliefs):
            if t == 0 and not first and config.carry_belief:
                continue
            for mask, p in enumerate(b.weights):
                rows.append({"problem": idx, "step": t, "global_step": step, "model_mask": mask, "probability": float(p)})
            step += 1
        first = False
        final = beliefs[-1]
        summary.append({
            "problem": idx,
            "plan": " ".join(result.plan.actions),
            "cost": str(result.cost),
            "true_model_belief": final[space.true_mask],
            "argmax": final.argmax(),
        })
    return ExperimentResult(
        "convergence", config, [e[4] for e in executed], rows, summary,
        {"true_mask": space.true_mask, "n_models": len(space),
         "truncated": any(any(e[2].truncation_flags.values()) for e in executed)},
    )


def noise_seed(seed: int, problem_index: int) -> int:
    return seed * 1_000_003 + problem_index


def run_noise_sweep(config: ExperimentConfig) -> ExperimentResult:
    space, problems = resolve_domain(config.domain)
    chosen = _select_problems(problems, config)
    executed = _executed_plans(space, chosen, config)
    params = config.synthesis.params
    rows = []
    summary = []
    for level in config.noise_levels:
        finals = []
        for seed in config.seeds:
            belief = _initial(space, config)
            corrupted = noop = 0
            for idx, problem, _, trace, _ in executed:
                noisy = corrupt_trace(trace, space.true_model, NoiseModel(level, noise_seed(seed, idx)))
                corrupted += noisy.corrupted
                noop += noisy.noop_corruptions
                end = belief_trace(belief, space, problem, noisy, params)[-1]
                belief = end if config.carry_belief else _initial(space, config)
                last = end
            finals.append(last)
            rows.append({
                "noise_level": level, "seed": seed,
                "true_model_belief": last[space.true_mask], "argmax": last.argmax(),
                "corrupted": corrupted, "noop_corruptions": noop,
            })
        true_b = [b[space.true_mask] for b in finals]
        summary.append({
            "noise_level": level,
            "mean_true_model_belief": float(np.mean(true_b)),
            "argmax_true_rate": float(np.mean([b.argmax() == space.true_mask for b in finals])),
            "seeds": len(finals),
        })
    return ExperimentResult("noise", config, [], rows, summary, {"true_mask": space.true_mask, "n_models": len(space)})


def run_comparison(config: ExperimentConfig, payoff=None) -> ExperimentResult:
    """OP / EXP / ActiveEXP per problem, each plan scored by active explicability.

    ``payoff`` optionally maps a plan's actions to a domain-level payoff that
    is reported next to cost.
    """
    space, problems = resolve_domain(config.domain)
    belief = _initial(space, config)
    rows = []
    summary = []
    for idx, problem in _select_problems(problems, config):
        entry = {"problem": idx}
        for objective in ("OP", "EXP", "ActiveEXP"):
            synth = SynthesisConfig(config.gamma, config.zeta, config.beta, config.alpha, config.max_plans, objective)
            try:
                result = synthesize(space, problem, belief, synth)
            except UnsolvableError:
                raise ExperimentError(f"problem {idx} is unsolvable under the true model") from None
            details = active_explicability_details(result.plan, space, problem, belief, synth.params)
            row = {
                "problem": idx,
                "objective": objective,
                "plan": " ".join(result.plan.actions),
                "cost": str(result.cost),
                "E_A": details.score,
            }
            if payoff is not None:
                row["payoff"] = str(payoff(result.plan.actions))
            rows.append(row)
            entry[f"{objective}_cost"] = str(result.cost)
            entry[f"{objective}_E_A"] = details.score
            if payoff is not None:
                entry[f"{objective}_payoff"] = row["payoff"]
        summary.append(entry)
    return ExperimentResult("comparison", config, [], rows, summary, {"true_mask": space.true_mask})


RUNNERS = {
    "convergence": run_convergence,
    "noise": run_noise_sweep,
    "comparison": run_comparison,
}
