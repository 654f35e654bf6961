"""Command-line entry point.

Exit codes: 0 success, 1 unsolvable problem, 2 invalid input or usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from pathlib import Path

import numpy as np

from .core import Plan, apply_action, is_applicable, to_fraction, validate_plan
from .domainfile import DomainFileError, load_domain
from .explicability import (
    Belief,
    ExplicabilityParams,
    ObservationTrace,
    active_explicability_details,
    belief_trace,
    exact_posterior_oracle,
    static_explicability,
    write_belief_csv,
)
from .experiments import BUILTIN_DOMAINS, RUNNERS, ExperimentConfig, ExperimentError
from .planner import DEFAULT_MAX_PLANS, DEFAULT_ZETA, PlanningBudgetExceeded, UnsolvableError, enumerate_candidate_plans
from .synthesis import DEFAULT_GAMMA, OBJECTIVES, SynthesisConfig, synthesize

SCHEMA_VERSION = 1
OUT_ENV = "ACTIVE_EXP_OUT"

EXIT_OK, EXIT_UNSOLVABLE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fraction_arg(text):
    try:
        return to_fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_params(p, gamma=True):
    p.add_argument("--zeta", type=_fraction_arg, default=DEFAULT_ZETA, help="cost threshold factor (default 1.1)")
    p.add_argument("--beta", type=float, default=1.0, help="Boltzmann rationality (default 1.0)")
    p.add_argument("--alpha", type=float, default=0.5, help="belief transition mixing weight (default 0.5)")
    if gamma:
        p.add_argument("--gamma", type=_fraction_arg, default=DEFAULT_GAMMA, help="cost weight (default 0.05)")
    p.add_argument("--max-plans", type=int, default=DEFAULT_MAX_PLANS, help="candidate set cap (default 1000)")


def _add_domain(p):
    p.add_argument("domain", help=f"domain file, or one of: {', '.join(BUILTIN_DOMAINS)}")
    p.add_argument("--problem", type=int, default=0, help="problem index in the domain file")
    p.add_argument("--prior", type=_float_list, default=None, help="initial belief, comma-separated (default uniform)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="active-exp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="synthesize a plan under OP, EXP or ActiveEXP")
    _add_domain(p)
    _add_params(p)
    p.add_argument("--objective", default="ActiveEXP", type=str.lower,
                   choices=[o.lower() for o in OBJECTIVES])
    p.add_argument("--dump-plans", action="store_true", help="include the true-model candidate set")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["json"], default="json")

    p = sub.add_parser("score", help="static and active explicability of a given plan")
    _add_domain(p)
    _add_params(p, gamma=False)
    p.add_argument("--plan", required=True, help="space-separated action ids")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["json"], default="json")

    p = sub.add_parser("belief-trace", help="belief after each observed action, as CSV")
    _add_domain(p)
    _add_params(p, gamma=False)
    p.add_argument("--trace", "--plan", dest="trace", default="", help="space-separated observed action ids")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("experiment", help="run a synthetic evaluation")
    p.add_argument("kind", choices=sorted(RUNNERS))
    p.add_argument("config", nargs="?", default=None, help="JSON experiment config")
    p.add_argument("--domain", default=None)
    p.add_argument("--zeta", type=_fraction_arg)
    p.add_argument("--beta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=_fraction_arg)
    p.add_argument("--max-plans", type=int)
    p.add_argument("--noise-levels", "--levels", dest="noise_levels", type=_float_list)
    p.add_argument("--seeds", type=int, help="number of seeds, 0..N-1")
    p.add_argument("--carry-belief", dest="carry_belief", action="store_true", default=None)
    p.add_argument("--no-carry-belief", dest="carry_belief", action="store_false")
    p.add_argument("--objective", type=str.lower, choices=[o.lower() for o in OBJECTIVES])
    p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./results)")
    p.add_argument("--format", choices=["csv"], default="csv")

    p = sub.add_parser("validate", help="cross-check forward inference against exact enumeration")
    p.add_argument("domain", nargs="?", default=None, help="domain to check; random instances when omitted")
    p.add_argument("--problem", type=int, default=0)
    p.add_argument("--trace", default=None, help="observed actions (default: the optimal plan)")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    _add_params(p, gamma=False)
    return parser


def _load(args):
    path = BUILTIN_DOMAINS.get(args.domain, args.domain)
    space, problems, _ = load_domain(path)
    if not 0 <= args.problem < len(problems):
        raise UsageError(f"problem index {args.problem} out of range (domain has {len(problems)})")
    return space, problems[args.problem]


def _prior(args, space):
    if getattr(args, "prior", None) is None:
        return Belief.uniform(len(space))
    if len(args.prior) != len(space):
        raise UsageError(f"prior has {len(args.prior)} entries, model space has {len(space)}")
    try:
        return Belief(np.array(args.prior))
    except ValueError as exc:
        raise UsageError(str(exc))


def _params(args) -> ExplicabilityParams:
    try:
        return ExplicabilityParams(args.zeta, args.beta, args.alpha, args.max_plans)
    except ValueError as exc:
        raise UsageError(str(exc))


def _actions(text, space, what="trace"):
    actions = text.split()
    for t, a in enumerate(actions, 1):
        if a not in space.true_model.action_map:
            raise UsageError(f"{what} step {t}: unknown action {a!r}")
    return actions


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_plan(args) -> int:
    space, problem = _load(args)
    prior = _prior(args, space)
    try:
        config = SynthesisConfig(args.gamma, args.zeta, args.beta, args.alpha, args.max_plans, args.objective)
    except ValueError as exc:
        raise UsageError(str(exc))
    result = synthesize(space, problem, prior, config)
    doc = {"schema_version": SCHEMA_VERSION, **result.to_dict()}
    if args.dump_plans:
        cands = enumerate_candidate_plans(space.true_model, problem, args.zeta, args.max_plans)
        doc["candidates"] = {
            "optimal_cost": str(cands.optimal_cost),
            "zeta": str(cands.zeta),
            "truncated": cands.truncated,
            "plans": [{"actions": list(p.actions), "cost": str(p.cost)} for p in cands.plans],
        }
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    return EXIT_OK


def _trace(space, problem, actions):
    model = space.true_model
    state = problem.initial
    for t, a in enumerate(actions, 1):
        if not is_applicable(model, state, a):
            raise UsageError(f"step {t}: {a} is not applicable under the true model")
        state = apply_action(model, state, a)
    return ObservationTrace.from_plan(model, problem.initial, actions)


def cmd_score(args) -> int:
    space, problem = _load(args)
    prior = _prior(args, space)
    params = _params(args)
    actions = _actions(args.plan, space, "plan")
    trace = _trace(space, problem, actions)
    plan = Plan.from_actions(space.true_model, actions)
    details = active_explicability_details(plan, space, problem, prior, params, trace)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "plan": actions,
        "cost": str(plan.cost),
        "valid": validate_plan(space.true_model, problem, plan),
        "active_explicability": details.score,
        "step_scores": details.step_scores,
        "static_explicability": static_explicability(
            plan, prior, problem, params.zeta, params.beta, params.max_plans, space
        ),
        "per_step_beliefs": [b.tolist() for b in details.beliefs],
        "truncated": details.truncated,
        "fallback_steps": details.fallback_steps,
    }
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_belief_trace(args) -> int:
    space, problem = _load(args)
    prior = _prior(args, space)
    params = _params(args)
    actions = _actions(args.trace, space)
    trace = _trace(space, problem, actions)
    beliefs = belief_trace(prior, space, problem, trace, params)
    if args.format == "json":
        text = json.dumps({
            "schema_version": SCHEMA_VERSION,
            "trace": actions,
            "beliefs": [b.tolist() for b in beliefs],
            "fallback_steps": [t for t, b in enumerate(beliefs) if b.fallback],
        }, indent=1) + "\n"
    else:
        buf = io.StringIO()
        write_belief_csv(beliefs, buf)
        text = buf.getvalue()
    _emit(text, args.out)
    return EXIT_OK


def _experiment_config(args) -> ExperimentConfig:
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc.strerror}")
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}: line {exc.lineno}: {exc.msg}")
    overrides = {
        "domain": args.domain, "zeta": args.zeta, "beta": args.beta, "alpha": args.alpha,
        "gamma": args.gamma, "max_plans": args.max_plans, "noise_levels": args.noise_levels,
        "carry_belief": args.carry_belief, "objective": args.objective,
        "seeds": list(range(args.seeds)) if args.seeds is not None else None,
    }
    for k, v in overrides.items():
        if v is not None:
            doc[k] = str(v) if k in ("zeta", "gamma") else v
    try:
        return ExperimentConfig.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid experiment config: {exc}")


def _write_csv(path: Path, rows) -> None:
    if not rows:
        path.write_text("")
        return
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})


def _print_summary(summary) -> None:
    if not summary:
        return
    keys = list(summary[0])
    cells = [[_cell(r[k]) for k in keys] for r in summary]
    widths = [max(len(k), *(len(c[i]) for c in cells)) for i, k in enumerate(keys)]
    print("  ".join(k.ljust(w) for k, w in zip(keys, widths)))
    for c in cells:
        print("  ".join(v.ljust(w) for v, w in zip(c, widths)))


def _cell(v) -> str:
    return f"{v:.4f}" if isinstance(v, float) else str(v)


def cmd_experiment(args) -> int:
    config = _experiment_config(args)
    out_dir = Path(args.out or os.environ.get(OUT_ENV) or "results")
    digest = config.digest(args.kind)
    stem = f"{args.kind}-{digest}"
    manifest_path = out_dir / f"{stem}.json"
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())
        print(f"reusing {manifest_path}")
        _print_summary(manifest["summary"])
        return EXIT_OK
    payoff = None
    if config.domain == "taxi":
        from .domains.taxi import DEFAULT_GRID, guests_of, payoff as taxi_payoff

        payoff = lambda actions: taxi_payoff(DEFAULT_GRID, guests_of(actions))  # noqa: E731
    runner = RUNNERS[args.kind]
    result = runner(config, payoff) if args.kind == "comparison" else runner(config)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        rows_path = out_dir / f"{stem}.csv"
        _write_csv(rows_path, result.rows)
        written.append(rows_path)
        summary_path = out_dir / f"{stem}-summary.csv"
        _write_csv(summary_path, result.summary)
        written.append(summary_path)
        manifest = result.manifest()
        manifest["files"] = [p.name for p in written]
        manifest_path.write_text(json.dumps(manifest, indent=1) + "\n")
        written.append(manifest_path)
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    _print_summary(result.summary)
    print(f"wrote {', '.join(str(p) for p in written)}")
    return EXIT_OK


def cmd_validate(args) -> int:
    params = _params(args)
    worst = 0.0
    checked = 0
    if args.domain is not None:
        space, problem = _load(args)
        if args.trace is None:
            from .planner import optimal_plan

            plan = optimal_plan(space.true_model, problem)
            if plan is None:
                raise UnsolvableError("problem unsolvable under the true model")
            actions = list(plan.actions)[:3]
        else:
            actions = _actions(args.trace, space)
        trace = _trace(space, problem, actions)
        prior = Belief.uniform(len(space))
        fwd = belief_trace(prior, space, problem, trace, params)
        exact = exact_posterior_oracle(space, problem, trace, params, prior)
        worst = max(float(np.max(np.abs(a.weights - b.weights))) for a, b in zip(fwd, exact))
        checked = 1
    else:
        from .randomdomains import random_instance

        rng = random.Random(args.seed)
        for _ in range(args.instances):
            space, problem, trace, alpha = random_instance(rng)
            p = ExplicabilityParams(params.zeta, params.beta, alpha, params.max_plans)
            prior = Belief.uniform(len(space))
            fwd = belief_trace(prior, space, problem, trace, p)
            exact = exact_posterior_oracle(space, problem, trace, p, prior)
            worst = max(worst, max(float(np.max(np.abs(a.weights - b.weights))) for a, b in zip(fwd, exact)))
            checked += 1
    ok = worst <= args.tol
    print(json.dumps({"schema_version": SCHEMA_VERSION, "instances": checked, "max_abs_diff": worst, "ok": ok}))
    return EXIT_OK if ok else EXIT_UNSOLVABLE


COMMANDS = {
    "plan": cmd_plan,
    "score": cmd_score,
    "belief-trace": cmd_belief_trace,
    "experiment": cmd_experiment,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, DomainFileError, ExperimentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE if not isinstance(exc, ExperimentError) else EXIT_UNSOLVABLE
    except UnsolvableError as exc:
        print(f"unsolvable: {exc}", file=sys.stderr)
        return EXIT_UNSOLVABLE
    except PlanningBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSOLVABLE
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
