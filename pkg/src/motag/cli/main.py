"""``motag`` command-line entry point.

Exit codes: 0 success, 2 usage error, 3 numerical or precision failure,
4 configuration validation failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings

from .. import __version__
from ..analytic import (
    CltParams,
    ModelParams,
    clt_mean_approx,
    mean_known_deterministic,
    mean_known_poisson,
    mean_known_selective,
    prob_fraction_not_found,
    stationary_pmf_poisson,
)
from ..errors import ConfigError, PrecisionError, SingularGeneratorError, ValidityError
from ..sim import run_scenario
from . import reproduce as repro
from .config import DEMO, KEYS, build_scenario, load_config, parse_override
from .output import output_dir, write_outputs

EXIT_USAGE, EXIT_NUMERIC, EXIT_CONFIG = 2, 3, 4
DIST_MAX_M = 5000


class UsageError(Exception):
    pass


def _params(args) -> ModelParams:
    if args.rho is not None:
        if args.beta is not None:
            raise UsageError("give either --rho or --beta, not both")
        delta = args.delta if args.delta is not None else 1.0
        return ModelParams(args.m, args.rho * delta, delta, args.r)
    if args.beta is None or args.delta is None:
        raise UsageError("give --rho, or both --beta and --delta")
    return ModelParams(args.m, args.beta, args.delta, args.r)


def cmd_analytic(args) -> int:
    t0 = time.perf_counter()
    try:
        params = _params(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.kind == "poisson":
        value = mean_known_poisson(params)
    elif args.kind == "deterministic":
        value = mean_known_deterministic(params)
    elif args.kind == "selective":
        value = mean_known_selective(params)
    else:
        try:
            clt = CltParams(params, args.sigma)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        value = clt_mean_approx(clt)
    frac = value / params.m
    print(f"{value:.6g} ({100 * frac:.6g}%)")
    if args.csv:
        path = output_dir(args.out_dir) / args.csv
        row = (args.kind, params.m, params.beta, params.delta, params.r, args.sigma, value, frac)
        header = ("kind", "m", "beta", "delta", "r", "sigma", "mean_known", "fraction_known")
        write_outputs({path: (header, [row])}, {
            "command": "analytic",
            "query": dict(zip(header[:6], row[:6])),
            "wall_clock_seconds": time.perf_counter() - t0,
        })
    return 0


def cmd_dist(args) -> int:
    t0 = time.perf_counter()
    if args.m > DIST_MAX_M:
        raise UsageError(f"--m must be at most {DIST_MAX_M}")
    rhos = args.rho
    out = output_dir(args.out_dir)
    try:
        params = [ModelParams.from_rho(args.m, rho) for rho in rhos]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    manifest = {"command": "dist", "query": {"m": args.m, "rho": rhos, "fraction": args.fraction}}
    if len(rhos) == 1:
        pmf = stationary_pmf_poisson(params[0])
        outputs = {out / (args.out or "dist.csv"): (("ell", "probability"), list(enumerate(pmf.mass)))}
        if args.fraction is not None:
            print(f"P(Y <= {math.floor((1 - args.fraction) * args.m + 1e-9)}) = "
                  f"{prob_fraction_not_found(params[0], args.fraction):.6g}")
    else:
        if args.fraction is None:
            raise UsageError("several --rho values need --fraction")
        rows = [(p.rho, prob_fraction_not_found(p, args.fraction)) for p in params]
        outputs = {out / (args.out or "dist_sweep.csv"): (("rho", "prob_fraction_not_found"), rows)}
        for rho, prob in rows:
            print(f"{rho:.6g},{prob:.6g}")
    manifest["wall_clock_seconds"] = time.perf_counter() - t0
    write_outputs(outputs, manifest)
    return 0


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    if args.from_manifest:
        with open(args.from_manifest, encoding="utf-8") as fh:
            flat = dict(json.load(fh)["config"])
    elif args.config:
        flat = load_config(args.config)
    else:
        flat = dict(DEMO)
    for item in args.set or []:
        key, value = parse_override(item)
        flat[key] = value
    for key in ("seed", "replications", "horizon", "warmup"):
        value = getattr(args, key)
        if value is not None:
            flat[key] = value
    cfg = build_scenario(flat)
    if cfg.trace_events != args.trace:
        from dataclasses import replace
        cfg = replace(cfg, trace_events=args.trace)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = run_scenario(cfg, workers=args.workers)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)

    for ev in result.replications[0].trace:
        ident = f"proxy-{ev.slot + 1:03d}.g{ev.generation}" if ev.slot >= 0 else "all-proxies"
        print(f"t={ev.t:.3f} {ev.kind:<7} {ident:<18} Y={ev.known}")

    out = output_dir(args.out_dir)
    manifest = {
        "command": "simulate",
        "config": {k: flat[k] for k in KEYS if k in flat},
        "seed": cfg.seed,
        "summary": {
            "time_avg_known": result.time_avg_known,
            "fraction_known": result.fraction_known,
            "ci95_halfwidth": result.ci_halfwidth,
        },
        "wall_clock_seconds": time.perf_counter() - t0,
    }
    write_outputs({
        out / "trajectory.csv": (("t", "Y"), [(t, int(y)) for t, y in result.trajectory]),
        out / "running_avg.csv": (("t", "avg_Y"), result.running_avg.tolist()),
    }, manifest)
    print(f"time_avg_known={result.time_avg_known:.6g} fraction={100 * result.fraction_known:.6g}% "
          f"ci95=+/-{result.ci_halfwidth:.4g} ({cfg.replications} replications)")
    return 0


def cmd_reproduce(args) -> int:
    targets = list(repro.TARGETS) if args.target == "all" else [args.target]
    out = output_dir(args.out_dir)
    for target in targets:
        t0 = time.perf_counter()
        rhos = None
        if args.rho_exp is not None:
            rhos = repro.log_grid(args.rho_exp[0], args.rho_exp[1], args.per_decade)
        rows = repro.compute(target, args.replications, args.horizon, args.seed, args.workers, rhos)
        name, header = repro.TARGETS[target]
        write_outputs({out / name: (header, rows)}, {
            "command": "reproduce",
            "target": target,
            "seed": args.seed,
            "replications": args.replications,
            "horizon": args.horizon,
            "rho_exp": args.rho_exp,
            "per_decade": args.per_decade,
            "wall_clock_seconds": time.perf_counter() - t0,
        })
        print(f"# {name}")
        print(",".join(header))
        for row in rows:
            print(",".join(f"{v:.6g}" for v in row))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="motag", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analytic", help="stationary mean number of known proxies")
    a.add_argument("kind", choices=("poisson", "deterministic", "selective", "clt"))
    a.add_argument("--m", type=int, required=True)
    a.add_argument("--rho", type=float)
    a.add_argument("--beta", type=float)
    a.add_argument("--delta", type=float)
    a.add_argument("--r", type=float, default=1.0)
    a.add_argument("--sigma", type=float, default=0.0, help="inter-probe std (clt only)")
    a.add_argument("--csv", help="also write the result to this CSV file")
    a.add_argument("--out-dir")
    a.set_defaults(func=cmd_analytic)

    d = sub.add_parser("dist", help="stationary pmf of Y under Poisson probing")
    d.add_argument("--m", type=int, required=True)
    d.add_argument("--rho", type=float, nargs="+", required=True)
    d.add_argument("--fraction", type=float)
    d.add_argument("--out", help="CSV file name inside the output directory")
    d.add_argument("--out-dir")
    d.set_defaults(func=cmd_dist)

    s = sub.add_parser("simulate", help="run a Monte Carlo scenario")
    s.add_argument("config", nargs="?", help="scenario file (default: built-in demo)")
    s.add_argument("--from-manifest", help="re-run the config recorded in a manifest sidecar")
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    s.add_argument("--seed", type=int)
    s.add_argument("--replications", type=int)
    s.add_argument("--horizon", type=float)
    s.add_argument("--warmup", type=float)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--trace", type=int, default=0, help="print the first N events of replication 0")
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("reproduce", help="regenerate a published table or figure as CSV")
    r.add_argument("target", choices=(*repro.TARGETS, "all"))
    r.add_argument("--replications", type=int, default=30)
    r.add_argument("--horizon", type=float, default=3e4)
    r.add_argument("--seed", type=int, default=repro.DEFAULT_SEED)
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--rho-exp", type=int, nargs=2, metavar=("LO", "HI"),
                   help="figure sweep from 10**LO to 10**HI")
    r.add_argument("--per-decade", type=int, default=10)
    r.add_argument("--out-dir")
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (PrecisionError, ValidityError, SingularGeneratorError) as exc:
        print(f"motag: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConfigError as exc:
        print(f"motag: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"motag: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
