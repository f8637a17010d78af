"""Random taskset generation for the simulation experiments.

Utilizations come from UUniFast; periods are drawn from the divisors of
1000 so every hyperperiod divides 1000; execution times round to at least
one tick (the experiments therefore bucket by the resulting actual
utilization, not the target).  A requested fraction of tasks is marked
trusted, and the victim is the task at the requested priority rank, forced
trusted and counted inside the trusted quota.

All draws go through numpy SeedSequence substreams keyed by caller-supplied
integers, so parallel generation stays reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .task_model import (
    Task,
    TaskSet,
    Trust,
    VictimConfig,
    assign_rm,
    validate,
)


def divisors_of(n: int) -> tuple[int, ...]:
    return tuple(d for d in range(1, n + 1) if n % d == 0)


PERIOD_POOL_1000 = divisors_of(1000)


class VictimPosition(Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"  # second to lowest: the lowest-priority victim has no lp set

    def rank(self, n: int) -> int:
        if self is VictimPosition.HIGH:
            return 1
        if self is VictimPosition.MEDIUM:
            return (n + 1) // 2
        return max(1, n - 1)


@dataclass(frozen=True)
class GenParams:
    total_utilization: float
    n_tasks: tuple[int, int] = (2, 10)
    period_pool: tuple[int, ...] = PERIOD_POOL_1000
    trusted_fraction: float = 0.2
    victim_position: Optional[VictimPosition] = None
    window_fraction: float = 0.0
    seed: int = 0


class DegenerateTaskset(RuntimeError):
    """Rounding pushed the set past full utilization on every retry."""


def _under_full_utilization(tasks: list[Task]) -> bool:
    """Exact rational check of sum(C_i/T_i) < 1."""
    scale = math.lcm(*[t.period for t in tasks])
    return sum(t.wcet * (scale // t.period) for t in tasks) < scale


def uunifast(n: int, total_u: float, rng: np.random.Generator) -> list[float]:
    """Unbiased utilization split: remaining sum times uniform^(1/(n-i))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < total_u < 1:
        raise ValueError("total utilization must lie in (0, 1)")
    us = []
    remaining = total_u
    for i in range(1, n):
        nxt = remaining * rng.random() ** (1.0 / (n - i))
        us.append(remaining - nxt)
        remaining = nxt
    us.append(remaining)
    return us


def _draw_tasks(params: GenParams, rng: np.random.Generator) -> Optional[list[Task]]:
    lo, hi = params.n_tasks
    n = int(rng.integers(lo, hi + 1))
    us = uunifast(n, params.total_utilization, rng)
    pool = params.period_pool
    periods = [int(pool[k]) for k in rng.integers(0, len(pool), size=n)]
    tasks = []
    for k in range(n):
        c = max(1, round(us[k] * periods[k]))
        if c > periods[k]:
            return None
        tasks.append(Task(id=k + 1, wcet=c, period=periods[k]))
    if not _under_full_utilization(tasks):
        return None
    return tasks


def base_taskset(params: GenParams, key: Sequence[int]) -> TaskSet:
    """Plain rate-monotonic taskset, no trust marks, no victim.

    key is the substream path (any ints); degenerate draws retry on fresh
    substreams a bounded number of times.
    """
    for attempt in range(64):
        rng = np.random.default_rng(np.random.SeedSequence((params.seed, *key, attempt)))
        tasks = _draw_tasks(params, rng)
        if tasks is not None:
            return validate(assign_rm(TaskSet(tasks=tuple(tasks))))
    raise DegenerateTaskset(
        f"no feasible rounding after 64 attempts at U={params.total_utilization}"
    )


def victimize(
    base: TaskSet,
    position: VictimPosition,
    window_fraction: float,
    trusted_fraction: float,
    key: Sequence[int],
    seed: int = 0,
) -> TaskSet:
    """Designate the victim at a priority rank and sample the trusted set.

    The victim is forced trusted and counts toward ceil(trusted_fraction*n);
    priorities are re-assigned afterwards so a trusted task tied with the
    victim ends up below it.
    """
    n = len(base.tasks)
    rank = position.rank(n)
    victim = base.tasks[rank - 1]
    n_trusted = math.ceil(trusted_fraction * n)
    others = [t.id for t in base.tasks if t.id != victim.id]
    rng = np.random.default_rng(np.random.SeedSequence((seed, *key)))
    extra = rng.choice(len(others), size=max(0, n_trusted - 1), replace=False)
    trusted_ids = {victim.id} | {others[int(k)] for k in extra}
    tasks = tuple(
        replace(t, trust=Trust.TRUSTED if t.id in trusted_ids else Trust.UNTRUSTED,
                priority=None)
        for t in base.tasks
    )
    omega = int(window_fraction * victim.period)
    ts = TaskSet(tasks=tasks, victim=VictimConfig(victim_id=victim.id, window=omega))
    return validate(assign_rm(ts))


def gen_taskset(params: GenParams) -> TaskSet:
    """One-shot generation per the experiment recipe."""
    base = base_taskset(params, key=(0,))
    if params.victim_position is None:
        if params.trusted_fraction <= 0:
            return base
        n = len(base.tasks)
        n_trusted = math.ceil(params.trusted_fraction * n)
        rng = np.random.default_rng(np.random.SeedSequence((params.seed, 1)))
        chosen = rng.choice(n, size=n_trusted, replace=False)
        ids = {base.tasks[int(k)].id for k in chosen}
        tasks = tuple(
            replace(t, trust=Trust.TRUSTED if t.id in ids else Trust.UNTRUSTED)
            for t in base.tasks
        )
        return validate(TaskSet(tasks=tasks))
    return victimize(
        base,
        params.victim_position,
        params.window_fraction,
        params.trusted_fraction,
        key=(1,),
        seed=params.seed,
    )


def gen_harmonic(
    n: int,
    base_period: int,
    total_u: float,
    rng: np.random.Generator,
    max_period: int = 1024,
) -> TaskSet:
    """Harmonic taskset: periods form a divisibility chain from base_period."""
    if n < 2:
        raise ValueError("harmonic generation needs n >= 2")
    for _ in range(64):
        periods = [base_period]
        for _ in range(n - 1):
            factor = int(rng.integers(1, 5))
            nxt = periods[-1] * factor
            periods.append(nxt if nxt <= max_period else periods[-1])
        us = uunifast(n, total_u, rng)
        tasks = []
        ok = True
        for k in range(n):
            c = max(1, round(us[k] * periods[k]))
            if c > periods[k]:
                ok = False
                break
            tasks.append(Task(id=k + 1, wcet=c, period=periods[k]))
        if ok and _under_full_utilization(tasks):
            return validate(assign_rm(TaskSet(tasks=tuple(tasks))))
    raise DegenerateTaskset(f"no feasible harmonic rounding at U={total_u}")
