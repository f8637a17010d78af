"""Response-time analysis when only the victim may run inside its windows.

Each victim completion opens a non-preemptive region of length Omega that
blocks every other task.  Non-victim bounds:

    hp(v):  R = C_i + Omega + sum_{j in hp(i)} ceil(R/T_j) C_j
    lp(v):  R = C_i + sum_{j in hp(i)} ceil(R/T_j) C_j + ceil(R/T_v) Omega

The victim itself needs busy-period analysis because its window can push
work into its next instance:

    L = sum_{j in hp(v)} ceil(L/T_j) C_j + ceil(L/T_v) (C_v + Omega)
    f_k = sum_{j in hp(v)} ceil(f_k/T_j) C_j + (k-1) Omega + k C_v
    R_v = max_k { f_k - (k-1) T_v },   0 < k <= ceil(L / T_v)
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil
from typing import Optional

from .rta_core import FixedPointResult, fixed_point, hp_tasks, interference
from .task_model import AnalysisError, Mode, RtaReport, TaskSet, hyperperiod


@dataclass(frozen=True)
class VictimFixedPoint(FixedPointResult):
    """Victim response bound plus the busy-period evidence behind it."""

    busy_period: Optional[int] = None
    finish_times: tuple[int, ...] = ()


def rta_paranoid_nonvictim(taskset: TaskSet, task_id: int) -> FixedPointResult:
    if taskset.victim is None:
        raise AnalysisError("NoVictim: paranoid analysis needs a victim")
    if task_id == taskset.victim.victim_id:
        raise AnalysisError("IsVictim: use rta_paranoid_victim for the victim task")
    task = taskset.by_id(task_id)
    victim = taskset.victim_task()
    omega = taskset.victim.window
    hps = hp_tasks(taskset, task)

    if task.priority < victim.priority:  # blocked by at most one open window
        def f(r: int) -> int:
            return task.wcet + omega + interference(hps, r)

        return fixed_point(f, task.wcet + omega, task.deadline)

    def f(r: int) -> int:  # blocked by every window instance
        return task.wcet + interference(hps, r) + ceil(r / victim.period) * omega

    return fixed_point(f, task.wcet, task.deadline)


def rta_paranoid_victim(taskset: TaskSet) -> VictimFixedPoint:
    if taskset.victim is None:
        raise AnalysisError("NoVictim: paranoid analysis needs a victim")
    victim = taskset.victim_task()
    omega = taskset.victim.window
    hps = hp_tasks(taskset, victim)
    t_v, c_v = victim.period, victim.wcet

    def busy(l: int) -> int:
        return interference(hps, l) + ceil(l / t_v) * (c_v + omega)

    # A busy period longer than the hyperperiod means demand (with window
    # overhead) outruns the processor: report the victim unschedulable.
    lres = fixed_point(busy, c_v + omega, hyperperiod(taskset))
    iters = lres.iterations
    if lres.diverged:
        return VictimFixedPoint(value=None, iterations=iters, busy_period=None)

    k_max = ceil(lres.value / t_v)
    finishes: list[int] = []
    worst = 0
    for k in range(1, k_max + 1):
        base = (k - 1) * omega + k * c_v

        def f(x: int) -> int:
            return interference(hps, x) + base

        fres = fixed_point(f, base, (k - 1) * t_v + victim.deadline)
        iters += fres.iterations
        if fres.diverged:
            return VictimFixedPoint(
                value=None,
                iterations=iters,
                busy_period=lres.value,
                finish_times=tuple(finishes),
            )
        finishes.append(fres.value)
        worst = max(worst, fres.value - (k - 1) * t_v)
    return VictimFixedPoint(
        value=worst,
        iterations=iters,
        busy_period=lres.value,
        finish_times=tuple(finishes),
    )


def analyze_paranoid(taskset: TaskSet) -> RtaReport:
    if taskset.victim is None:
        raise AnalysisError("NoVictim: paranoid analysis needs a victim")
    vid = taskset.victim.victim_id
    bounds: dict[int, Optional[int]] = {}
    for t in taskset.tasks:
        if t.id == vid:
            bounds[t.id] = rta_paranoid_victim(taskset).value
        else:
            bounds[t.id] = rta_paranoid_nonvictim(taskset, t.id).value
    ok = all(v is not None for v in bounds.values())
    return RtaReport(mode=Mode.PARANOID, bounds=bounds, schedulable=ok)
