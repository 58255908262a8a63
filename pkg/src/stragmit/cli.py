"""Command-line entry point for reproducible experiments.

Subcommands: analytic, simulate, cluster, fit, frontier, trace-tail.
Distributions use a ``name:params`` mini-grammar (see ``--dist`` help);
grids use ``lo:hi`` (integers, inclusive), ``lo:hi:step`` or a comma list.
Outputs are CSV for curves and JSON otherwise, byte-identical for an
identical invocation and seed. Relative output paths resolve against
$STRAGMIT_OUT_DIR when it is set.

Exit codes: 0 success, 2 usage, 3 domain error, 4 convergence/instability,
5 I/O error. Failures print a one-line JSON object to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import analytic_models as am
from . import cluster_sim, fitting, monte_carlo, trace
from .distributions import Empirical, Exp, Pareto, SExp, TaskDist, TruncatedPareto, empirical_from_file
from .errors import (
    ConvergenceError,
    DomainError,
    InstabilityError,
    StragmitError,
    UnsupportedPolicyError,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NUMERIC = 4
EXIT_IO = 5

DIST_GRAMMAR = (
    "exp:MU | sexp:S,MU | pareto:S,ALPHA | tpareto:S,U,ALPHA | empirical:PATH"
)


def parse_dist(text: str) -> TaskDist:
    name, _, params = text.partition(":")
    name = name.strip().lower()
    try:
        if name == "exp":
            (mu,) = _floats(params, 1)
            return Exp(mu)
        if name == "sexp":
            s, mu = _floats(params, 2)
            return SExp(s, mu)
        if name == "pareto":
            s, alpha = _floats(params, 2)
            return Pareto(s, alpha)
        if name == "tpareto":
            s, u, alpha = _floats(params, 3)
            return TruncatedPareto(s, u, alpha)
        if name == "empirical":
            if not params:
                raise DomainError("empirical needs a sample-file path")
            return empirical_from_file(params)
    except ValueError as exc:
        raise DomainError(f"bad distribution spec {text!r}: {exc}") from exc
    raise DomainError(f"unknown distribution {name!r}; grammar: {DIST_GRAMMAR}")


def _floats(params: str, n: int) -> list[float]:
    parts = [p for p in params.split(",") if p.strip()]
    if len(parts) != n:
        raise ValueError(f"expected {n} comma-separated parameters, got {len(parts)}")
    return [float(p) for p in parts]


def parse_redundancy(text: str, need_level: bool = True):
    name, _, level = text.partition(":")
    name = name.strip().lower()
    if name == "none":
        return am.NoRedundancy()
    if name in ("rep", "replication"):
        if not level:
            if need_level:
                raise DomainError("replication needs a level, e.g. rep:2")
            return am.Replication(1)
        return am.Replication(int(level))
    if name in ("coding", "code", "mds"):
        if not level:
            if need_level:
                raise DomainError("coding needs a level, e.g. coding:14")
            return None  # placeholder; the sweep knob supplies n
        return am.Coding(int(level))
    raise DomainError(f"unknown redundancy {text!r} (none | rep:C | coding:N)")


def parse_grid(text: str) -> list[float]:
    if "," in text:
        return [float(v) for v in text.split(",") if v.strip()]
    parts = text.split(":")
    if len(parts) == 2:
        lo, hi = float(parts[0]), float(parts[1])
        if lo == int(lo) and hi == int(hi):
            return [float(v) for v in range(int(lo), int(hi) + 1)]
        raise DomainError("lo:hi grids need integer endpoints; use lo:hi:step")
    if len(parts) == 3:
        lo, hi, step = (float(p) for p in parts)
        if step <= 0:
            raise DomainError("grid step must be positive")
        out = []
        v = lo
        while v <= hi + 1e-12:
            out.append(round(v, 12))
            v += step
        return out
    raise DomainError(f"bad grid {text!r}; use lo:hi, lo:hi:step or v1,v2,...")


def parse_delta(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity", "never"):
        return math.inf
    return float(text)


def _out_path(name: str | None) -> Path | None:
    if name is None:
        return None
    path = Path(name)
    base = os.environ.get("STRAGMIT_OUT_DIR")
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        print(text)
    else:
        out.write_text(text + "\n")


def _policy_from_args(args) -> am.PolicyConfig:
    red = parse_redundancy(args.redundancy)
    return am.PolicyConfig(
        k=args.k,
        redundancy=red,
        delta=args.delta,
        red_launch=am.RedLaunch.AT_ZERO if args.red_launch == "zero" else am.RedLaunch.AT_DELTA,
        relaunch_at_delta=args.relaunch,
    )


# ---------------------------------------------------------------------------
# subcommand bodies


def cmd_analytic(args) -> int:
    config = _policy_from_args(args)
    dist = parse_dist(args.dist)
    try:
        metrics = am.evaluate(config, dist)
        payload = metrics.to_dict()
    except UnsupportedPolicyError:
        if config.relaunch_at_delta and config.red_launch is am.RedLaunch.AT_ZERO and isinstance(dist, Pareto):
            latency = am.zero_delay_red_relaunch(
                config.k, config.redundancy, config.delta, dist.s, dist.alpha
            )
            payload = {"latency_mean": latency, "note": "costs require simulate"}
        else:
            raise
    _emit(json.dumps(payload, indent=2), _out_path(args.out))
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _policy_from_args(args)
    dist = parse_dist(args.dist)
    empirical = monte_carlo.simulate_job(
        config,
        dist,
        trials=args.trials,
        seed=args.seed,
        threads=args.threads,
        dump_trials_to=_out_path(args.dump_trials),
    )
    payload = {"empirical": empirical.to_dict()}
    try:
        analytic = am.evaluate(config, dist)
        payload["analytic"] = analytic.to_dict()
        payload["compare"] = monte_carlo.compare(analytic, empirical).to_dict()
    except (UnsupportedPolicyError, DomainError) as exc:
        payload["analytic_unavailable"] = str(exc)
    _emit(json.dumps(payload, indent=2), _out_path(args.out))
    return EXIT_OK


def cmd_cluster(args) -> int:
    if args.config:
        config = cluster_sim.config_from_file(args.config)
    else:
        config = cluster_sim.ClusterConfig()
    overrides = {}
    if args.r is not None:
        overrides["expansion_rate"] = args.r
    if args.jobs is not None:
        overrides["horizon_jobs"] = args.jobs
    if overrides:
        from dataclasses import replace

        config = replace(config, **overrides)
    result = cluster_sim.run_cluster(config, seed=args.seed)
    if args.samples_out:
        cluster_sim.export_exec_samples(result, _out_path(args.samples_out))
    _emit(result.to_json(), _out_path(args.out))
    return EXIT_OK


def cmd_fit(args) -> int:
    samples = empirical_from_file(args.samples).samples
    fits = {}
    if args.kind in ("pareto", "both"):
        fits["pareto"] = fitting.fit_pareto(samples)
    if args.kind in ("tpareto", "both"):
        fits["truncated_pareto"] = fitting.fit_truncated_pareto(samples)
    payload = {}
    for name, fit in fits.items():
        entry = fit.to_dict()
        entry["goodness"] = {
            "ks_statistic": fitting.goodness_report(fit, samples).ks_statistic
        }
        payload[name] = entry
    _emit(json.dumps(payload, indent=2), _out_path(args.out))
    return EXIT_OK


def cmd_frontier(args) -> int:
    red = parse_redundancy(args.redundancy, need_level=False)
    base = am.PolicyConfig(
        k=args.k,
        redundancy=red if red is not None else am.Coding(args.k + 1),
        delta=args.delta,
        red_launch=am.RedLaunch.AT_ZERO if args.red_launch == "zero" else am.RedLaunch.AT_DELTA,
        relaunch_at_delta=args.relaunch,
    )
    dist = parse_dist(args.dist)
    curve = am.sweep(base, args.knob, parse_grid(args.grid), dist)
    out = _out_path(args.out)
    if out is None:
        raise DomainError("frontier requires --out for the CSV")
    curve.write_csv(out)
    out.with_suffix(".json").write_text(curve.to_json() + "\n")
    return EXIT_OK


def cmd_trace_tail(args) -> int:
    parsed = trace.parse_events(args.events)
    result = trace.exec_times(parsed.events, filter_k=args.filter_k)
    if not result.times:
        raise DomainError("no completed tasks found in the trace")
    if args.grid:
        grid = parse_grid(args.grid)
    else:
        lo, hi = min(result.times), max(result.times)
        grid = [lo + i * (hi - lo) / 49 for i in range(50)] if hi > lo else [lo]
    curve = trace.tail_curve(result.times, grid)
    out = _out_path(args.out)
    if out is None:
        raise DomainError("trace-tail requires --out for the CSV")
    trace.write_tail_curve_csv(curve, out)
    if args.samples_out:
        with open(_out_path(args.samples_out), "w") as fh:
            for v in result.times:
                fh.write(f"{v!r}\n")
    summary = {
        "tasks": len(result.times),
        "dropped": result.dropped,
        "parse_errors": len(parsed.errors),
        "curve": str(out),
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stragmit",
        description="Cost vs latency of straggler-mitigation policies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def policy_flags(p, dist_required=True):
        p.add_argument("--k", type=int, required=True, help="number of tasks in the job")
        p.add_argument("--redundancy", default="none", help="none | rep:C | coding:N")
        p.add_argument("--delta", type=parse_delta, default=0.0,
                       help="launch/relaunch time (a float, or 'inf' for never)")
        p.add_argument("--red-launch", choices=("zero", "delta"), default="delta",
                       help="launch redundancy at time zero or at delta")
        p.add_argument("--relaunch", action="store_true",
                       help="cancel and relaunch remaining tasks at delta")
        p.add_argument("--dist", required=dist_required, help=f"task times: {DIST_GRAMMAR}")

    p = sub.add_parser("analytic", help="evaluate one policy's closed forms")
    policy_flags(p)
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("simulate", help="Monte-Carlo metrics and oracle comparison")
    policy_flags(p)
    p.add_argument("--trials", type=int, default=monte_carlo.DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--dump-trials", help="CSV path for raw per-trial rows")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("cluster", help="discrete-event cluster simulation")
    p.add_argument("--config", help="ClusterConfig JSON/TOML file")
    p.add_argument("--r", type=float, help="override expansion rate")
    p.add_argument("--jobs", type=int, help="override horizon (arrivals)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--samples-out", help="write task execution-time samples here")
    p.add_argument("--out", help="write the JSON summary here instead of stdout")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("fit", help="fit Pareto / truncated-Pareto tails to samples")
    p.add_argument("--samples", required=True, help="one-value-per-line sample file")
    p.add_argument("--kind", choices=("pareto", "tpareto", "both"), default="both")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("frontier", help="sweep a knob and write the tradeoff curve")
    policy_flags(p)
    p.add_argument("--knob", choices=am._KNOBS, required=True)
    p.add_argument("--grid", required=True, help="lo:hi | lo:hi:step | v1,v2,...")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="CSV path (JSON written alongside)")
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("trace-tail", help="extract execution times and tail curve")
    p.add_argument("--events", required=True, help="task-event CSV file")
    p.add_argument("--filter-k", type=int, help="keep only jobs with exactly k tasks")
    p.add_argument("--grid", help="time grid for the tail curve")
    p.add_argument("--samples-out", help="also write extracted times, one per line")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="CSV path for (t, survival) rows")
    p.set_defaults(func=cmd_trace_tail)

    return parser


def _fail(exc: Exception, code: int) -> int:
    sys.stderr.write(json.dumps({"error": str(exc), "type": type(exc).__name__}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConvergenceError, InstabilityError) as exc:
        return _fail(exc, EXIT_NUMERIC)
    except (DomainError, UnsupportedPolicyError) as exc:
        return _fail(exc, EXIT_DOMAIN)
    except StragmitError as exc:
        return _fail(exc, EXIT_DOMAIN)
    except OSError as exc:
        return _fail(exc, EXIT_IO)


if __name__ == "__main__":
    sys.exit(main())
