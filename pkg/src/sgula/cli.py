"""Command-line front end.

Subcommands: ``run`` (preset or config-file experiments), ``constants``
(Table-style constants report for a parameter file), ``check`` (assumption
falsification checks), ``rate`` (discretization-rate study) and ``scad``
(the robust-regression benchmark).  Exit codes: 0 on success, 2 when a run
completes but an acceptance gate fails, 1 on error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .assumptions import ProbePlan, run_all_checks
from .constants import ProblemParams, constants_report
from .experiments import (ExperimentSpec, ScadStudySpec, apply_overrides,
                          build_spec, emit_report, preset_config, read_config,
                          run_experiment, run_rate_study, run_scad_regression)
from .potentials import make_model

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_GATE_FAILED = 2


def _finish(report, out_dir) -> int:
    if out_dir is not None:
        manifest = emit_report(report, out_dir)
        print(json.dumps({"out_dir": str(out_dir), "files": manifest}, indent=2))
    else:
        print(json.dumps(report.as_dict(), indent=2, sort_keys=True))
    if report.gates and not report.passed:
        failed = [k for k, v in report.gates.items() if not v]
        print(f"acceptance gate(s) failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_GATE_FAILED
    return EXIT_OK


def _cmd_run(args) -> int:
    if args.preset is not None:
        conf = preset_config(args.preset)
    elif args.config is not None:
        conf = read_config(args.config)
    else:
        raise SystemExit("sgula run needs --preset or --config")
    if args.seed is not None:
        conf.setdefault("experiment", {})["seed"] = str(args.seed)
    conf = apply_overrides(conf, args.override or [])
    spec = build_spec(conf)
    report = run_experiment(spec)
    return _finish(report, args.out)


def _load_params(path) -> ProblemParams:
    with open(path) as f:
        raw = json.load(f)
    return ProblemParams(**raw)


def _cmd_constants(args) -> int:
    rep = constants_report(_load_params(args.params))
    print(rep.to_json())
    return EXIT_OK


def _cmd_check(args) -> int:
    model_kw = {}
    if args.constants is not None:
        with open(args.constants) as f:
            model_kw = json.load(f)
    model = make_model(args.model, **model_kw)
    plan = ProbePlan(n_points=args.probes, n_pairs=args.probes, seed=args.seed)
    reports = run_all_checks(model, plan)
    print(json.dumps([r.as_dict() for r in reports], indent=2))
    if not all(r.passed for r in reports):
        return EXIT_GATE_FAILED
    return EXIT_OK


def _cmd_rate(args) -> int:
    spec = ExperimentSpec(kind="rate_study", seed=args.seed, beta=args.beta,
                          rate_lambdas=tuple(args.lam), rate_steps=args.steps,
                          rate_burn_in=args.burn_in)
    report = run_rate_study(spec)
    return _finish(report, args.out)


def _cmd_scad(args) -> int:
    spec = ScadStudySpec(n_reps=args.reps, seed=args.seed)
    report = run_scad_regression(spec)
    return _finish(report, args.out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sgula",
                                description="Subgradient Langevin sampling toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset or config-file experiment")
    run.add_argument("--preset", help="named preset (mog_k3, mog_k5, scad_fan, "
                                      "lambda_sweep, beta_sweep, rate_default)")
    run.add_argument("--config", help="path to a [section] key = value config file")
    run.add_argument("--out", help="output directory for report artifacts")
    run.add_argument("--seed", type=int, help="master seed override")
    run.add_argument("--override", action="append", metavar="SECTION.KEY=VALUE",
                     help="config override, repeatable")
    run.set_defaults(fn=_cmd_run)

    con = sub.add_parser("constants", help="emit the constants report as JSON")
    con.add_argument("--params", required=True,
                     help="JSON file of problem parameters (m, L, K, mu, R, "
                          "h0_norm, beta, d, ...)")
    con.set_defaults(fn=_cmd_constants)

    chk = sub.add_parser("check", help="run assumption falsification checks")
    chk.add_argument("--model", required=True,
                     help="catalog model tag (quadratic, l1, max_quadratic, ...)")
    chk.add_argument("--constants", help="JSON file of model keyword arguments")
    chk.add_argument("--probes", type=int, default=100_000)
    chk.add_argument("--seed", type=int, default=0)
    chk.set_defaults(fn=_cmd_check)

    rate = sub.add_parser("rate", help="discretization-rate study")
    rate.add_argument("--lam", type=float, nargs="+",
                      default=[0.2, 0.1, 0.05, 0.025])
    rate.add_argument("--steps", type=int, default=1_000_000)
    rate.add_argument("--burn-in", type=int, default=50_000)
    rate.add_argument("--beta", type=float, default=1.0)
    rate.add_argument("--seed", type=int, default=0)
    rate.add_argument("--out")
    rate.set_defaults(fn=_cmd_rate)

    scad = sub.add_parser("scad", help="SCAD vs LASSO regression benchmark")
    scad.add_argument("--reps", type=int, default=100)
    scad.add_argument("--seed", type=int, default=0)
    scad.add_argument("--out")
    scad.set_defaults(fn=_cmd_scad)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit:
        raise
    except Exception as exc:                      # surfaced as exit code 1
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
