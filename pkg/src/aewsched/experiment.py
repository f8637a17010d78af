"""Experiment orchestration: schedulability-ratio and coverage studies.

Both experiments draw tasksets per target-utilization bucket, simulate one
hyperperiod per policy, and report rows grouped by the taskset's *actual*
utilization (execution-time rounding shifts it above the target).  Within a
cell every policy sees the same tasksets (matched seeds), so policy curves
are paired comparisons.

Outputs are CSV with fixed headers:

  sched-ratio: bucket_lo,bucket_hi,policy,victim_pos,aew_frac,n,schedulable_frac
  coverage:    bucket_lo,bucket_hi,policy,aew_frac,n,mean_untrusted_ratio

Baseline rows carry victim_pos '-' and aew_frac 0 (no victim involved).
"""

from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from . import _fast
from .generator import GenParams, VictimPosition, base_taskset, victimize
from .task_model import TaskSet

BUCKET_STEP = 0.1
N_BUCKETS = 10

SCHED_HEADER = "bucket_lo,bucket_hi,policy,victim_pos,aew_frac,n,schedulable_frac"
COVERAGE_HEADER = "bucket_lo,bucket_hi,policy,aew_frac,n,mean_untrusted_ratio"


class ConfigInvalid(ValueError):
    pass


@dataclass(frozen=True)
class ExpConfig:
    tasksets_per_bucket: int = 10000
    bucket_los: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    policies: tuple[str, ...] = ("baseline", "paranoid", "trusted")
    victim_positions: tuple[str, ...] = ("high", "medium", "low")
    aew_fracs: tuple[float, ...] = (0.1, 0.3, 0.5)
    trusted_fraction: float = 0.2
    n_tasks: tuple[int, int] = (2, 10)
    seed: int = 1
    jobs: int = 1
    chunk: int = 500


@dataclass(frozen=True)
class SchedRatioRow:
    bucket_lo: float
    bucket_hi: float
    policy: str
    victim_pos: str
    aew_frac: float
    n: int
    schedulable_frac: float


@dataclass(frozen=True)
class CoverageRow:
    bucket_lo: float
    bucket_hi: float
    policy: str
    aew_frac: float
    n: int
    mean_untrusted_ratio: float


def parse_config(text: str, base: Optional[ExpConfig] = None) -> ExpConfig:
    """key=value lines; unknown keys are rejected."""
    cfg = base or ExpConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigInvalid(f"line {lineno}: expected key=value")
        key, val = key.strip(), val.strip()
        if key == "tasksets_per_bucket":
            cfg = replace(cfg, tasksets_per_bucket=int(val))
        elif key == "policies":
            cfg = replace(cfg, policies=tuple(p.strip() for p in val.split(",") if p.strip()))
        elif key == "victim":
            cfg = replace(cfg, victim_positions=tuple(v.strip() for v in val.split(",") if v.strip()))
        elif key == "aew":
            cfg = replace(cfg, aew_fracs=tuple(float(x) for x in val.split(",") if x.strip()))
        elif key == "seed":
            cfg = replace(cfg, seed=int(val))
        elif key == "jobs":
            cfg = replace(cfg, jobs=int(val))
        elif key == "trusted_fraction":
            cfg = replace(cfg, trusted_fraction=float(val))
        elif key == "n_tasks":
            lo, _, hi = val.partition("-")
            cfg = replace(cfg, n_tasks=(int(lo), int(hi or lo)))
        else:
            raise ConfigInvalid(f"line {lineno}: unknown key {key!r}")
    return cfg


def _check_sched_config(cfg: ExpConfig) -> None:
    if not cfg.policies:
        raise ConfigInvalid("policies must not be empty")
    bad = set(cfg.policies) - {"baseline", "paranoid", "trusted"}
    if bad:
        raise ConfigInvalid(f"unknown policies {sorted(bad)}")
    if not cfg.victim_positions or not cfg.aew_fracs:
        raise ConfigInvalid("victim positions and aew fractions must not be empty")
    for v in cfg.victim_positions:
        try:
            VictimPosition(v)
        except ValueError:
            raise ConfigInvalid(f"unknown victim position {v!r}") from None
    if cfg.tasksets_per_bucket < 1:
        raise ConfigInvalid("tasksets_per_bucket must be positive")


def _gen_base(cfg: ExpConfig, bucket_ix: int, idx: int) -> TaskSet:
    lo = cfg.bucket_los[bucket_ix]
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 7, bucket_ix, idx)))
    target = lo + BUCKET_STEP * rng.random()
    params = GenParams(
        total_utilization=target,
        n_tasks=cfg.n_tasks,
        trusted_fraction=cfg.trusted_fraction,
        seed=cfg.seed,
    )
    return base_taskset(params, key=(11, bucket_ix, idx))


def _actual_bucket(ts: TaskSet) -> int:
    u = ts.total_utilization()
    return min(int(u / BUCKET_STEP), N_BUCKETS - 1)


def _hyperperiod(ts: TaskSet) -> int:
    h = 1
    for t in ts.tasks:
        h = math.lcm(h, t.period)
    return h


def _sched_chunk(args) -> tuple[dict, dict]:
    cfg, bucket_ix, start, end = args
    counts: dict = {}
    totals: dict = {}
    n_buf = 16
    worst = np.empty(n_buf, np.int64)
    missc = np.empty(n_buf, np.int64)
    ticks = np.empty(1, np.int64)
    zero_b = np.zeros(n_buf, np.int64)
    run_baseline = "baseline" in cfg.policies
    run_paranoid = "paranoid" in cfg.policies
    run_trusted = "trusted" in cfg.policies

    for idx in range(start, end):
        base = _gen_base(cfg, bucket_ix, idx)
        ab = _actual_bucket(base)
        totals[ab] = totals.get(ab, 0) + 1
        horizon = _hyperperiod(base)

        if run_baseline:
            C, T, PHI, untrusted, _, _ = _fast.arrays_for(base)
            missed, _, _ = _fast.sim_kernel(
                C, T, PHI, untrusted, zero_b, _fast.BASELINE, -1, 0, horizon,
                True, worst, missc, ticks, False,
            )
            key = (ab, "baseline", "-", 0.0)
            counts[key] = counts.get(key, 0) + (0 if missed else 1)

        if not (run_paranoid or run_trusted):
            continue
        for p_ix, pos in enumerate(cfg.victim_positions):
            vts = victimize(
                base, VictimPosition(pos), 0.0, cfg.trusted_fraction,
                key=(13, bucket_ix, idx, p_ix), seed=cfg.seed,
            )
            C, T, PHI, untrusted, victim, _ = _fast.arrays_for(vts)
            t_v = int(T[victim])
            for frac in cfg.aew_fracs:
                omega = int(frac * t_v)
                for policy, code in (
                    ("paranoid", _fast.PARANOID),
                    ("trusted", _fast.TRUSTED),
                ):
                    if policy not in cfg.policies:
                        continue
                    missed, _, _ = _fast.sim_kernel(
                        C, T, PHI, untrusted, zero_b, code, victim, omega,
                        horizon, True, worst, missc, ticks, False,
                    )
                    key = (ab, policy, pos, frac)
                    counts[key] = counts.get(key, 0) + (0 if missed else 1)
    return counts, totals


def _coverage_chunk(args) -> tuple[dict, dict]:
    cfg, bucket_ix, start, end = args
    sums: dict = {}
    totals: dict = {}
    n_buf = 16
    worst = np.empty(n_buf, np.int64)
    missc = np.empty(n_buf, np.int64)
    ticks = np.empty(1, np.int64)

    for idx in range(start, end):
        base = _gen_base(cfg, bucket_ix, idx)
        ab = _actual_bucket(base)
        totals[ab] = totals.get(ab, 0) + 1
        horizon = _hyperperiod(base)
        vts = victimize(
            base, VictimPosition(cfg.victim_positions[0]), 0.0,
            cfg.trusted_fraction, key=(13, bucket_ix, idx, 0), seed=cfg.seed,
        )
        C, T, PHI, untrusted, victim, _ = _fast.arrays_for(vts)
        budgets = np.zeros(C.shape[0], np.int64)
        if "co" in cfg.policies:
            _fast.budgets_kernel(C, T, budgets)
        t_v = int(T[victim])
        for frac in cfg.aew_fracs:
            omega = int(frac * t_v)
            for policy in cfg.policies:
                code = _fast.BASELINE if policy == "rm" else _fast.CO
                _, untr, tot = _fast.sim_kernel(
                    C, T, PHI, untrusted, budgets, code, victim, omega,
                    horizon, False, worst, missc, ticks, False,
                )
                ratio = Fraction(int(untr), int(tot)) if tot else Fraction(0)
                key = (ab, policy, frac)
                sums[key] = sums.get(key, Fraction(0)) + ratio
    return sums, totals


def _run_chunks(cfg: ExpConfig, worker) -> tuple[dict, dict]:
    items = []
    for b_ix in range(len(cfg.bucket_los)):
        for start in range(0, cfg.tasksets_per_bucket, cfg.chunk):
            end = min(start + cfg.chunk, cfg.tasksets_per_bucket)
            items.append((cfg, b_ix, start, end))
    if cfg.jobs > 1:
        with multiprocessing.Pool(cfg.jobs) as pool:
            results = pool.map(worker, items)
    else:
        results = [worker(it) for it in items]
    agg: dict = {}
    totals: dict = {}
    for part, tot in results:
        for k, v in part.items():
            agg[k] = agg.get(k, type(v)(0)) + v
        for k, v in tot.items():
            totals[k] = totals.get(k, 0) + v
    return agg, totals


def run_sched_ratio(cfg: ExpConfig) -> list[SchedRatioRow]:
    _check_sched_config(cfg)
    counts, totals = _run_chunks(cfg, _sched_chunk)
    rows = []
    for (ab, policy, pos, frac), ok in sorted(
        counts.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2], kv[0][3])
    ):
        n = totals[ab]
        rows.append(
            SchedRatioRow(
                bucket_lo=round(ab * BUCKET_STEP, 1),
                bucket_hi=round((ab + 1) * BUCKET_STEP, 1),
                policy=policy,
                victim_pos=pos,
                aew_frac=frac,
                n=n,
                schedulable_frac=ok / n,
            )
        )
    return rows


def run_coverage(cfg: ExpConfig) -> list[CoverageRow]:
    if not cfg.policies:
        raise ConfigInvalid("policies must not be empty")
    bad = set(cfg.policies) - {"rm", "co"}
    if bad:
        raise ConfigInvalid(f"coverage policies must be rm/co, got {sorted(bad)}")
    if not cfg.victim_positions or not cfg.aew_fracs:
        raise ConfigInvalid("victim positions and aew fractions must not be empty")
    sums, totals = _run_chunks(cfg, _coverage_chunk)
    rows = []
    for (ab, policy, frac), s in sorted(
        sums.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])
    ):
        n = totals[ab]
        rows.append(
            CoverageRow(
                bucket_lo=round(ab * BUCKET_STEP, 1),
                bucket_hi=round((ab + 1) * BUCKET_STEP, 1),
                policy=policy,
                aew_frac=frac,
                n=n,
                mean_untrusted_ratio=float(s / n),
            )
        )
    return rows


def sched_ratio_csv(rows: list[SchedRatioRow]) -> str:
    lines = [SCHED_HEADER]
    for r in rows:
        lines.append(
            f"{r.bucket_lo:.1f},{r.bucket_hi:.1f},{r.policy},{r.victim_pos},"
            f"{r.aew_frac:g},{r.n},{r.schedulable_frac:.6f}"
        )
    return "\n".join(lines) + "\n"


def coverage_csv(rows: list[CoverageRow]) -> str:
    lines = [COVERAGE_HEADER]
    for r in rows:
        lines.append(
            f"{r.bucket_lo:.1f},{r.bucket_hi:.1f},{r.policy},{r.aew_frac:g},"
            f"{r.n},{r.mean_untrusted_ratio:.6f}"
        )
    return "\n".join(lines) + "\n"
