"""Shared test utilities: independent oracles and random-set generators.

The oracles here deliberately avoid the library's analysis code paths: the
naive scheduler is a literal per-tick argmax loop, and the window/blocking
oracles enumerate adversarial placements directly.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from aewsched.generator import GenParams, VictimPosition, base_taskset, victimize
from aewsched.simulator import simulate
from aewsched.task_model import TaskSet, Trust, VictimConfig, validate


def hyperperiod_of(ts: TaskSet) -> int:
    return math.lcm(*[t.period for t in ts.tasks])


def naive_rm_responses(ts: TaskSet, horizon: int):
    """Dumb per-tick preemptive fixed-priority scheduler, no windows.

    Returns (worst_response per id, missed flag).  Independent of
    aewsched.simulator: plain lists, no early exits, no segment logic.
    """
    tasks = sorted(ts.tasks, key=lambda t: t.priority)
    n = len(tasks)
    rem = [0] * n
    rel = [None] * n
    queue = [[] for _ in range(n)]
    worst = {t.id: None for t in tasks}
    missed = False
    for tick in range(horizon):
        for i, t in enumerate(tasks):
            if tick >= t.offset and (tick - t.offset) % t.period == 0:
                queue[i].append(tick)
        run = None
        for i in range(n):
            if queue[i]:
                run = i
                break
        if run is not None:
            i = run
            if rel[i] is None:
                rel[i] = queue[i][0]
                rem[i] = tasks[i].wcet
            rem[i] -= 1
            if rem[i] == 0:
                finish = tick + 1
                r = finish - rel[i]
                if rel[i] + tasks[i].period <= horizon:
                    if worst[tasks[i].id] is None or r > worst[tasks[i].id]:
                        worst[tasks[i].id] = r
                if r > tasks[i].period:
                    missed = True
                queue[i].pop(0)
                rel[i] = None
    for i in range(n):
        if queue[i] and queue[i][0] + tasks[i].period <= horizon:
            missed = True
    return worst, missed


def blocked_response_oracle(ts: TaskSet, task_id: int, blocking: int) -> int | None:
    """Response of task_id's first job when a non-preemptive blocker holds
    the processor for `blocking` ticks at the synchronous critical instant.

    Returns None if the job is still running past its deadline.
    """
    tasks = sorted(ts.tasks, key=lambda t: t.priority)
    n = len(tasks)
    target = next(i for i, t in enumerate(tasks) if t.id == task_id)
    deadline = tasks[target].period
    rem = [0] * n
    queue: list[list[int]] = [[] for _ in range(n)]
    for tick in range(blocking + 4 * deadline):
        for i, t in enumerate(tasks):
            if tick % t.period == 0:
                queue[i].append(tick)
                if len(queue[i]) == 1:
                    rem[i] = t.wcet
        if tick < blocking:
            continue
        run = next((i for i in range(n) if queue[i]), None)
        if run is None:
            continue
        rem[run] -= 1
        if rem[run] == 0:
            if run == target and queue[run][0] == 0:
                return tick + 1 if tick + 1 <= deadline else None
            queue[run].pop(0)
            if queue[run]:
                rem[run] = tasks[run].wcet
    return None


def window_exec_min_oracle(period: int, wcet: int, window: int) -> int:
    """Exact minimal execution of a (wcet, period) task inside one window.

    Enumerates every window placement (mod period) and, per job, the start
    that minimizes overlap; jobs place independently within
    [k*period, k*period + period - wcet].
    """
    best = None
    for x in range(period):
        lo, hi = x, x + window
        total = 0
        for k in range(-2, window // period + 3):
            job_best = None
            for s in range(k * period, k * period + period - wcet + 1):
                ov = max(0, min(hi, s + wcet) - max(lo, s))
                job_best = ov if job_best is None else min(job_best, ov)
            total += job_best
        best = total if best is None else min(best, total)
    return best


def window_supply_oracle(t_v: int, r_v: int, window: int, t: int) -> int:
    """Exact adversarial minimum of window time in any interval of length t.

    The adversary picks each victim completion in [release, release + r_v];
    windows are [completion, completion + window), unioned.  Exhaustive over
    completion patterns and interval positions (keep the sizes tiny).
    """
    if window == 0:
        return 0
    n_jobs = t // t_v + 4
    choices = r_v + 1
    best = None
    for pattern in range(choices ** min(n_jobs, 8)):
        p = pattern
        comps = []
        for k in range(min(n_jobs, 8)):
            comps.append(k * t_v + (p % choices))
            p //= choices
        covered = set()
        for c in comps:
            covered.update(range(c, c + window))
        for a in range(0, 2 * t_v):
            amount = sum(1 for x in range(a, a + t) if x in covered)
            if best is None or amount < best:
                best = amount
    return best


def coverage_oracle(ts: TaskSet) -> bool:
    """Brute-force covering check: simulate the plain schedule and demand a
    trusted task on every tick of every window instance."""
    h = hyperperiod_of(ts)
    trace = simulate(ts, "baseline", 3 * h)
    assert not trace.misses, "covering oracle needs a feasible schedule"
    trusted = {t.id for t in ts.tasks if t.trust is Trust.TRUSTED}
    ticks = trace.ticks()
    for s, e in trace.window_intervals:
        if s >= 2 * h:
            continue
        for x in range(s, min(e, 3 * h)):
            if ticks[x] is None or ticks[x] not in trusted:
                return False
    return True


def random_victimized(count: int, seed: int, u_lo: float = 0.05, u_hi: float = 0.95):
    """Deterministic stream of victimized tasksets in the experiment style."""
    rng = np.random.default_rng(seed)
    positions = list(VictimPosition)
    fracs = [0.1, 0.3, 0.5]
    made = 0
    k = 0
    while made < count:
        k += 1
        u = u_lo + (u_hi - u_lo) * rng.random()
        try:
            base = base_taskset(GenParams(total_utilization=u, seed=seed + k), key=(k,))
        except Exception:
            continue
        ts = victimize(
            base, positions[k % 3], fracs[(k // 3) % 3], 0.2, key=(k, 1), seed=seed
        )
        made += 1
        yield ts


def random_harmonic_covering(count: int, seed: int):
    """Harmonic, criticality-monotonic, zero-offset sets with a victim."""
    from aewsched.generator import gen_harmonic

    rng = np.random.default_rng(seed)
    made = 0
    while made < count:
        n = int(rng.integers(2, 6))
        base_p = int(rng.integers(2, 9))
        u = 0.3 + 0.65 * rng.random()
        try:
            ts = gen_harmonic(n, base_p, u, rng)
        except Exception:
            continue
        n_trusted = int(rng.integers(1, n + 1))
        tasks = tuple(
            replace(t, trust=Trust.TRUSTED if t.priority <= n_trusted else Trust.UNTRUSTED)
            for t in ts.tasks
        )
        victim = tasks[int(rng.integers(0, n_trusted))]
        omega = int(rng.integers(0, victim.period))
        made += 1
        yield validate(
            TaskSet(tasks=tasks, victim=VictimConfig(victim.id, omega))
        )
