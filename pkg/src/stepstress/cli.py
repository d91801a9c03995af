"""Command-line interface: ``stepstress {simulate,fit,mc,design-taus,calibrate}``.

Exit codes: 0 success (including statistical non-convergence), 2 usage or
validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    ConfigError,
    conf_levels,
    levels_from_config,
    load_json,
    params_from_config,
    plan_from_config,
    read_dataset,
    resolved_plan_dict,
    scheme_from_config,
    write_dataset,
)
from .estimation import fit
from .inference import (
    PARAM_NAMES,
    BootstrapUnstableError,
    approx_ci,
    bootstrap_sample,
    percentile_ci,
    test_gamma1_positive,
)
from .likelihood import SingularInformationError
from .mcstudy import Scenario, describe, render_table, run_scenario
from .model import arrhenius_x, calibrate, design_taus, inverse_power_x
from .sampling import RngStream, simulate_dataset
from .schemes import render_scheme

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 2, 3


def _tool() -> dict:
    return {"name": "stepstress", "version": __version__}


def _dump(doc: dict, out) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_simulate(args) -> int:
    cfg = load_json(args.config)
    params = params_from_config(cfg)
    if params is None:
        raise ConfigError("simulate needs gamma0, gamma1 and sigma")
    plan = plan_from_config(cfg, params)
    scheme = scheme_from_config(cfg)
    seed = int(cfg.get("seed", 0))
    sample = simulate_dataset(params, plan, scheme, RngStream(seed, 0))
    resolved = {
        "gamma0": params.gamma0, "gamma1": params.gamma1, "sigma": params.sigma,
        **resolved_plan_dict(plan), "n": scheme.n, "scheme": render_scheme(scheme), "seed": seed,
    }
    write_dataset(sample, args.out, header={"tool": _tool(), "config": resolved})
    sidecar = Path(args.out).with_suffix(".plan.json")
    _dump({"tool": _tool(), **resolved}, sidecar)
    return EXIT_OK


def _fit_report(args, cfg, sample) -> dict:
    doc = {"tool": _tool(), "data": str(args.data), "plan": resolved_plan_dict(sample.plan),
           "n": sample.n, "r": sample.r, "scheme": render_scheme(sample.scheme)}
    try:
        res = fit(sample, tol=args.tol, max_iter=args.max_iter)
    except SingularInformationError as exc:
        doc["error"] = "singular information"
        doc["message"] = str(exc)
        return doc
    doc.update({
        "converged": res.converged,
        "iterations": res.iterations,
        "grad_norm": res.grad_norm,
        "loglik": res.loglik_at_max,
        "estimates": dict(zip(PARAM_NAMES, map(float, res.theta))),
    })
    if res.fisher.singular:
        doc["error"] = "singular information"
        return doc
    doc["se"] = dict(zip(PARAM_NAMES, map(float, res.se)))
    if not res.converged:
        return doc
    levels = conf_levels(args.levels.split(","))
    if args.ci:
        doc["approximate"] = approx_ci(res, levels).to_dict()
    boot = None
    if args.boot:
        try:
            boot = bootstrap_sample(res, sample, args.boot, RngStream(args.seed, 0))
        except BootstrapUnstableError as exc:
            doc["bootstrap_error"] = str(exc)
        else:
            block = percentile_ci(boot, levels).to_dict()
            block["n_failed"] = boot.n_failed
            doc["percentile_bootstrap"] = block
    if args.test_gamma1:
        doc["test_gamma1"] = test_gamma1_positive(res, boot).to_dict()
    return doc


def cmd_fit(args) -> int:
    cfg = load_json(args.plan)
    plan = plan_from_config(cfg)
    sample = read_dataset(args.data, plan)
    _dump(_fit_report(args, cfg, sample), args.out)
    return EXIT_OK


def scenario_from_config(cfg: dict) -> Scenario:
    params = params_from_config(cfg)
    if params is None:
        raise ConfigError("a scenario needs gamma0, gamma1 and sigma")
    try:
        return Scenario(
            truth=params,
            plan=plan_from_config(cfg, params),
            scheme=scheme_from_config(cfg),
            replications=int(cfg.get("replications", 1000)),
            bootstrap_B=int(cfg.get("B", 0)),
            levels=conf_levels(cfg.get("conf_levels", (90, 95, 99))),
            seed=int(cfg.get("seed", 0)),
            scenario_id=str(cfg.get("scenario_id", "scenario")),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def cmd_mc(args) -> int:
    scenario = scenario_from_config(load_json(args.scenario))
    report = run_scenario(scenario, jobs=args.jobs)
    header = f"# tool: {json.dumps(_tool())}\n# config: {json.dumps(describe(scenario), sort_keys=True)}\n"
    if report.unreliable:
        header += "# flag: unreliable (more than 10% of fits failed)\n"
    fmt = "csv" if args.format == "csv" else "text"
    Path(args.out).write_text(header + render_table(report, fmt), encoding="utf-8")
    return EXIT_OK


def cmd_design_taus(args) -> int:
    cfg = load_json(args.config)
    params = params_from_config(cfg)
    if params is None:
        raise ConfigError("design-taus needs gamma0, gamma1 and sigma")
    probs = cfg.get("target_cum_probs")
    if probs is None and isinstance(cfg.get("taus"), dict):
        probs = cfg["taus"].get("target_cum_probs")
    if probs is None:
        raise ConfigError('"target_cum_probs" is required')
    levels = levels_from_config(cfg)
    try:
        taus = design_taus(params, levels, probs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _dump({"tool": _tool(), "x": levels, "taus": taus}, args.out)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    if args.celsius is not None:
        xs = list(np.atleast_1d(arrhenius_x(args.celsius)))
    elif args.inverse_power_v is not None:
        xs = list(np.atleast_1d(inverse_power_x(args.inverse_power_v)))
    else:
        xs = args.x
    if len(xs) != len(args.means):
        raise ConfigError("need one mean per stress level")
    try:
        p = calibrate(list(zip(xs, args.means)), args.sd_first)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _dump({"tool": _tool(), "x": [float(v) for v in xs],
           "gamma0": p.gamma0, "gamma1": p.gamma1, "sigma": p.sigma}, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stepstress", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a censored step-stress dataset")
    p.add_argument("config", help="experiment config JSON")
    p.add_argument("out", help="dataset CSV to write")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a dataset and report estimates and intervals")
    p.add_argument("data", help="dataset CSV")
    p.add_argument("plan", help="config JSON holding levels and taus")
    p.add_argument("--ci", action="store_true", help="approximate normal intervals")
    p.add_argument("--boot", type=int, default=0, metavar="B", help="percentile bootstrap with B resamples")
    p.add_argument("--levels", default="90,95,99", help="comma-separated confidence levels")
    p.add_argument("--test-gamma1", action="store_true", help="one-sided test of gamma1 > 0")
    p.add_argument("--seed", type=int, default=0, help="bootstrap seed")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("-o", "--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("mc", help="run a Monte Carlo scenario")
    p.add_argument("scenario", help="scenario JSON")
    p.add_argument("out", help="report file to write")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("csv", "text"), default="csv")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("design-taus", help="change times from target cumulative failure probabilities")
    p.add_argument("config")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_design_taus)

    p = sub.add_parser("calibrate", help="model parameters from mean lifetimes per level")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--celsius", type=float, nargs="+")
    g.add_argument("--x", type=float, nargs="+")
    g.add_argument("--inverse-power-v", type=float, nargs="+")
    p.add_argument("--means", type=float, nargs="+", required=True)
    p.add_argument("--sd-first", type=float, required=True)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("stepstress: error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except OSError as exc:
        print(f"stepstress: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError) as exc:
        print(f"stepstress: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
