"""Command-line front end.

Commands: gen, analyze, simulate, simulate-containers, cover,
exp sched-ratio, exp coverage.  See README for the file formats.
"""

from __future__ import annotations

import argparse
import sys

from . import container_sim, covering, experiment, generator, simulator
from .generator import GenParams, VictimPosition
from .rta_core import analyze_baseline
from .rta_paranoid import analyze_paranoid
from .rta_trusted import analyze_trusted
from .task_model import (
    AnalysisError,
    ValidationError,
    format_taskset,
    hyperperiod,
    read_taskset,
)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--out", default=None, help="output file (default stdout)")
    parser.add_argument("--jobs", type=int, default=1)


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_gen(args) -> int:
    params = GenParams(
        total_utilization=args.u,
        n_tasks=(args.n, args.n) if args.n else (2, 10),
        trusted_fraction=args.trusted_frac,
        victim_position=VictimPosition(args.victim) if args.victim else None,
        window_fraction=args.aew,
        seed=args.seed,
    )
    ts = generator.gen_taskset(params)
    _emit(format_taskset(ts), args.out)
    return 0


def _cmd_analyze(args) -> int:
    ts = read_taskset(args.taskset)
    if args.mode == "baseline":
        report = analyze_baseline(ts)
    elif args.mode == "paranoid":
        report = analyze_paranoid(ts)
    else:
        report = analyze_trusted(ts)
    lines = [f"mode: {report.mode.value}"]
    for t in ts.tasks:
        b = report.bounds[t.id]
        verdict = "unschedulable" if b is None else f"R={b} (D={t.deadline})"
        lines.append(f"task {t.id}: C={t.wcet} T={t.period} prio={t.priority} {verdict}")
    lines.append(f"taskset schedulable: {report.schedulable}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if report.schedulable else 1


def _cmd_simulate(args) -> int:
    ts = read_taskset(args.taskset)
    horizon = args.horizon or hyperperiod(ts)
    trace = simulator.simulate(ts, args.policy, horizon)
    m = simulator.metrics(trace, ts)
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            fh.write(simulator.trace_to_csv(trace, ts))
    lines = [f"horizon: {horizon}", f"policy: {args.policy}"]
    for t in ts.tasks:
        w = m.worst_response[t.id]
        lines.append(
            f"task {t.id}: worst_response={w if w is not None else '-'} "
            f"misses={m.miss_count[t.id]}"
        )
    lines.append(f"total_window: {m.total_window}")
    lines.append(f"untrusted_in_window: {m.untrusted_in_window}")
    lines.append(f"coverage_ratio_untrusted: {m.coverage_ratio_untrusted:.6f}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if not trace.misses else 1


def _cmd_simulate_containers(args) -> int:
    ts = read_taskset(args.taskset)
    containers = container_sim.read_containers(args.containers, args.period)
    trace = container_sim.simulate_two_level(containers, ts, args.horizon)
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            fh.write(simulator.trace_to_csv(trace, ts))
    m = simulator.metrics(trace, ts)
    lines = [f"horizon: {args.horizon}", f"period: {args.period}"]
    for t in ts.tasks:
        w = m.worst_response[t.id]
        lines.append(
            f"task {t.id}: worst_response={w if w is not None else '-'} "
            f"misses={m.miss_count[t.id]}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_cover(args) -> int:
    ts = read_taskset(args.taskset)
    v = covering.fully_covered(ts)
    lines = [
        f"covered: {v.covered}",
        f"witness: {v.witness.value}",
        f"R: {v.exact_response}",
        f"R+: {v.inflated_response}",
        f"threshold: {v.threshold}",
        f"victim R: {v.victim_response}",
        f"victim R+: {v.victim_inflated_response}",
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if v.covered else 1


def _load_exp_config(args, policies_default) -> experiment.ExpConfig:
    cfg = experiment.ExpConfig(policies=policies_default, seed=args.seed, jobs=args.jobs)
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = experiment.parse_config(fh.read(), base=cfg)
    if args.tasksets_per_bucket:
        from dataclasses import replace

        cfg = replace(cfg, tasksets_per_bucket=args.tasksets_per_bucket)
    return cfg


def _cmd_exp_sched(args) -> int:
    cfg = _load_exp_config(args, ("baseline", "paranoid", "trusted"))
    rows = experiment.run_sched_ratio(cfg)
    _emit(experiment.sched_ratio_csv(rows), args.out)
    return 0


def _cmd_exp_coverage(args) -> int:
    cfg = _load_exp_config(args, ("rm", "co"))
    rows = experiment.run_coverage(cfg)
    _emit(experiment.coverage_csv(rows), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aewsched")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random taskset")
    g.add_argument("--u", type=float, required=True, help="target total utilization")
    g.add_argument("--n", type=int, default=None, help="task count (default: random 2..10)")
    g.add_argument("--victim", choices=[v.value for v in VictimPosition], default=None)
    g.add_argument("--aew", type=float, default=0.0, help="window as fraction of victim period")
    g.add_argument("--trusted-frac", type=float, default=0.2)
    _common(g)
    g.set_defaults(fn=_cmd_gen)

    a = sub.add_parser("analyze", help="response-time analysis")
    a.add_argument("--taskset", required=True)
    a.add_argument("--mode", choices=["baseline", "paranoid", "trusted"], default="baseline")
    _common(a)
    a.set_defaults(fn=_cmd_analyze)

    s = sub.add_parser("simulate", help="simulate one schedule")
    s.add_argument("--taskset", required=True)
    s.add_argument("--policy", choices=["baseline", "paranoid", "trusted", "co"],
                   default="baseline")
    s.add_argument("--horizon", type=int, default=None, help="default: hyperperiod")
    s.add_argument("--trace-out", default=None, help="per-tick CSV trace")
    _common(s)
    s.set_defaults(fn=_cmd_simulate)

    c = sub.add_parser("simulate-containers", help="two-level container schedule")
    c.add_argument("--taskset", required=True)
    c.add_argument("--containers", required=True)
    c.add_argument("--period", type=int, required=True)
    c.add_argument("--horizon", type=int, required=True)
    c.add_argument("--trace-out", default=None)
    _common(c)
    c.set_defaults(fn=_cmd_simulate_containers)

    k = sub.add_parser("cover", help="window-covering decision (harmonic sets)")
    k.add_argument("--taskset", required=True)
    _common(k)
    k.set_defaults(fn=_cmd_cover)

    e = sub.add_parser("exp", help="experiments")
    esub = e.add_subparsers(dest="experiment", required=True)
    for name, fn in (("sched-ratio", _cmd_exp_sched), ("coverage", _cmd_exp_coverage)):
        ep = esub.add_parser(name)
        ep.add_argument("--config", default=None, help="key=value config file")
        ep.add_argument("--tasksets-per-bucket", type=int, default=None)
        _common(ep)
        ep.set_defaults(fn=fn)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValidationError, AnalysisError, experiment.ConfigInvalid, OverflowError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
