"""Tick-accurate preemptive fixed-priority schedule simulator.

One entity (task or idle) runs per tick.  Jobs release at phi_i + k*T_i,
execute for exactly C_i ticks, and a job finishing after its deadline is
recorded as a miss but runs to completion while later releases queue.

Every completion of the victim task opens a protection window
[finish, finish + Omega); overlapping windows merge.  Policies only differ
in which ready job may be picked:

  baseline   highest priority, windows ignored
  paranoid   inside a window only the victim is admitted
  trusted    inside a window only trusted tasks (victim included)
  co         coverage-oriented selection (see co_policy), windows ignored

The simulator is the ground-truth oracle for the response-time analyses.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .task_model import AnalysisError, TaskSet, Trust


class PolicyKind(Enum):
    BASELINE = "baseline"
    PARANOID = "paranoid"
    TRUSTED = "trusted"
    COVERAGE_ORIENTED = "co"


@dataclass(frozen=True)
class Policy:
    kind: PolicyKind

    @staticmethod
    def of(name) -> "Policy":
        if isinstance(name, Policy):
            return name
        if isinstance(name, PolicyKind):
            return Policy(kind=name)
        return Policy(kind=PolicyKind(name))


@dataclass
class Trace:
    """Execution record over [0, horizon).

    segments hold maximal runs of one entity as (start, end, task_id|None);
    None is idle.  window_intervals are merged and may extend past the
    horizon; metrics clip them.
    """

    horizon: int
    segments: list[tuple[int, int, Optional[int]]]
    releases: list[tuple[int, int]]  # (tick, task_id)
    completions: list[tuple[int, int, int]]  # (finish, task_id, release)
    misses: list[tuple[int, int]]  # (deadline, task_id)
    window_intervals: list[tuple[int, int]]

    def entity_at(self, tick: int) -> Optional[int]:
        for s, e, ent in self.segments:
            if s <= tick < e:
                return ent
        return None

    def ticks(self) -> list[Optional[int]]:
        out: list[Optional[int]] = [None] * self.horizon
        for s, e, ent in self.segments:
            for t in range(s, min(e, self.horizon)):
                out[t] = ent
        return out

    def in_window(self, tick: int) -> bool:
        return any(s <= tick < e for s, e in self.window_intervals)


@dataclass
class TraceMetrics:
    worst_response: dict[int, Optional[int]]
    miss_count: dict[int, int]
    untrusted_in_window: int
    total_window: int
    coverage_ratio_untrusted: float


@dataclass
class _TaskState:
    """Pending jobs of one task: releases are periodic, so the backlog is
    fully described by the oldest release and a count."""

    head_release: int = 0
    head_remaining: int = 0
    pending: int = 0
    blocking: int = 0  # coverage-oriented accounting for the head job


def simulate(
    taskset: TaskSet,
    policy,
    horizon: int,
    blocking_budgets: Optional[dict[int, int]] = None,
) -> Trace:
    """Run one schedule and return its full trace.

    blocking_budgets feeds the coverage-oriented policy; when omitted they
    are computed from the baseline analysis (unschedulable tasks get 0).
    """
    from . import co_policy  # local import to avoid a cycle

    policy = Policy.of(policy)
    if horizon <= 0:
        raise AnalysisError("HorizonZero: horizon must be positive")
    tasks = taskset.tasks
    n = len(tasks)
    kind = policy.kind

    victim_ix = -1
    omega = 0
    if taskset.victim is not None:
        victim_ix = taskset.index_of(taskset.victim.victim_id)
        omega = taskset.victim.window
    if kind is PolicyKind.COVERAGE_ORIENTED and victim_ix < 0:
        raise AnalysisError("NoVictim: coverage-oriented policy needs a victim")

    budgets: list[int] = [0] * n
    if kind is PolicyKind.COVERAGE_ORIENTED:
        if blocking_budgets is None:
            blocking_budgets = co_policy.blocking_budgets(taskset)
        budgets = [blocking_budgets[t.id] for t in tasks]

    trusted = [t.trust is Trust.TRUSTED for t in tasks]
    uhp_of_v = [i for i in range(victim_ix) if not trusted[i]] if victim_ix >= 0 else []

    st = [_TaskState() for _ in range(n)]
    next_rel = [t.offset for t in tasks]
    periods = [t.period for t in tasks]
    wcets = [t.wcet for t in tasks]

    segments: list[tuple[int, int, Optional[int]]] = []
    releases: list[tuple[int, int]] = []
    completions: list[tuple[int, int, int]] = []
    misses: list[tuple[int, int]] = []
    windows: list[tuple[int, int]] = []
    w_end = 0

    seg_start = 0
    seg_ent: Optional[int] = -2  # sentinel distinct from idle

    for t in range(horizon):
        for i in range(n):
            if next_rel[i] == t:
                s = st[i]
                if s.pending > 0:
                    misses.append((t, tasks[i].id))
                else:
                    s.head_release = t
                    s.head_remaining = wcets[i]
                    s.blocking = 0
                s.pending += 1
                releases.append((t, tasks[i].id))
                next_rel[i] += periods[i]

        in_w = t < w_end
        sel = -1
        if kind is PolicyKind.BASELINE or (
            kind in (PolicyKind.PARANOID, PolicyKind.TRUSTED) and not in_w
        ):
            for i in range(n):
                if st[i].pending > 0:
                    sel = i
                    break
        elif kind is PolicyKind.PARANOID:
            if st[victim_ix].pending > 0:
                sel = victim_ix
        elif kind is PolicyKind.TRUSTED:
            for i in range(n):
                if st[i].pending > 0 and trusted[i]:
                    sel = i
                    break
        else:  # coverage oriented, per co_policy.co_select
            sel = co_policy.select_index(st, trusted, victim_ix, uhp_of_v, budgets)

        if kind is PolicyKind.COVERAGE_ORIENTED:
            for i in range(n):
                if st[i].pending > 0 and i != sel:
                    st[i].blocking += 1

        ent = tasks[sel].id if sel >= 0 else None
        if ent != seg_ent:
            if seg_ent != -2:
                segments.append((seg_start, t, seg_ent))
            seg_start, seg_ent = t, ent

        if sel >= 0:
            s = st[sel]
            s.head_remaining -= 1
            if s.head_remaining == 0:
                finish = t + 1
                completions.append((finish, tasks[sel].id, s.head_release))
                s.pending -= 1
                if s.pending > 0:
                    s.head_release += periods[sel]
                    s.head_remaining = wcets[sel]
                    s.blocking = 0
                if sel == victim_ix and omega > 0:
                    if windows and finish <= w_end:
                        windows[-1] = (windows[-1][0], max(w_end, finish + omega))
                    else:
                        windows.append((finish, finish + omega))
                    w_end = max(w_end, finish + omega)

    if seg_ent != -2:
        segments.append((seg_start, horizon, seg_ent))

    # Jobs whose deadline lands exactly on the horizon were never reached by
    # a release instant; earlier missed deadlines were counted as they passed.
    for i in range(n):
        s = st[i]
        if s.pending > 0:
            d = horizon - s.head_release
            if d >= periods[i] and d % periods[i] == 0 and d // periods[i] <= s.pending:
                misses.append((horizon, tasks[i].id))

    return Trace(
        horizon=horizon,
        segments=segments,
        releases=releases,
        completions=completions,
        misses=misses,
        window_intervals=windows,
    )


def _clip_overlap(a: int, b: int, intervals: list[tuple[int, int]], hi: int) -> int:
    total = 0
    for s, e in intervals:
        lo = max(a, s)
        up = min(b, e, hi)
        if up > lo:
            total += up - lo
    return total


def metrics(trace: Trace, taskset: TaskSet) -> TraceMetrics:
    """Worst observed responses, miss counts, and window coverage tallies.

    Responses only count jobs whose deadline lies within the horizon;
    coverage counts untrusted ticks inside the (merged, clipped) windows.
    """
    worst: dict[int, Optional[int]] = {t.id: None for t in taskset.tasks}
    miss_count: dict[int, int] = {t.id: 0 for t in taskset.tasks}
    by_id = {t.id: t for t in taskset.tasks}

    for finish, tid, release in trace.completions:
        if release + by_id[tid].period <= trace.horizon:
            r = finish - release
            if worst[tid] is None or r > worst[tid]:
                worst[tid] = r
    for _, tid in trace.misses:
        miss_count[tid] += 1

    total_w = sum(
        max(0, min(e, trace.horizon) - s) for s, e in trace.window_intervals
    )
    untrusted_ticks = 0
    for s, e, ent in trace.segments:
        if ent is not None and not by_id[ent].is_trusted:
            untrusted_ticks += _clip_overlap(s, e, trace.window_intervals, trace.horizon)

    ratio = untrusted_ticks / total_w if total_w > 0 else 0.0
    return TraceMetrics(
        worst_response=worst,
        miss_count=miss_count,
        untrusted_in_window=untrusted_ticks,
        total_window=total_w,
        coverage_ratio_untrusted=ratio,
    )


def trace_to_csv(trace: Trace, taskset: TaskSet) -> str:
    """Per-tick export: tick,entity,in_window (entity is a task id or idle)."""
    lines = ["tick,entity,in_window"]
    in_w = [False] * trace.horizon
    for s, e in trace.window_intervals:
        for t in range(s, min(e, trace.horizon)):
            in_w[t] = True
    for t, ent in enumerate(trace.ticks()):
        name = "idle" if ent is None else str(ent)
        lines.append(f"{t},{name},{1 if in_w[t] else 0}")
    return "\n".join(lines) + "\n"
