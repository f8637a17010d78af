"""Baseline fixed-priority response-time analysis.

The worst-case response time of a task is the least positive fixed point of

    R = C_i + B + sum_{j in hp(i)} ceil(R / T_j) * C_j

with B an optional blocking term.  Iteration starts at C_i + B and stops on
the first repeat, or diverges once the iterate exceeds the deadline.

The maximum tolerable blocking B_i is the largest B for which the fixed
point still meets the deadline; the coverage-oriented scheduling policy uses
it as a per-task budget for deliberate priority inversion.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil
from typing import Callable, Optional

from .task_model import AnalysisError, Mode, RtaReport, Task, TaskSet


@dataclass(frozen=True)
class FixedPointResult:
    """Least fixed point of a response-time recurrence, or divergence.

    value is None exactly when the iterate exceeded the bound (deadline)
    before stabilizing.
    """

    value: Optional[int]
    iterations: int

    @property
    def diverged(self) -> bool:
        return self.value is None


def fixed_point(f: Callable[[int], int], start: int, limit: int) -> FixedPointResult:
    """Iterate r <- f(r) from start until repeat, diverging past limit.

    f must be non-decreasing; then the returned value is the least fixed
    point >= start.
    """
    r = start
    iters = 0
    while True:
        iters += 1
        nxt = f(r)
        if nxt > limit:
            return FixedPointResult(value=None, iterations=iters)
        if nxt == r:
            return FixedPointResult(value=r, iterations=iters)
        r = nxt


def least_satisfying(f: Callable[[int], int], start: int, limit: int) -> FixedPointResult:
    """Least t in [start, limit] with f(t) <= t, scanning upward.

    Safe for recurrences whose right-hand side is not monotone (for monotone
    f it returns exactly the least fixed point).
    """
    iters = 0
    for t in range(max(start, 1), limit + 1):
        iters += 1
        if f(t) <= t:
            return FixedPointResult(value=t, iterations=iters)
    return FixedPointResult(value=None, iterations=iters)


def hp_tasks(taskset: TaskSet, task: Task) -> list[Task]:
    return [t for t in taskset.tasks if t.priority < task.priority]


def interference(hps: list[Task], t: int) -> int:
    return sum(ceil(t / j.period) * j.wcet for j in hps)


def rta_baseline(taskset: TaskSet, task_id: int, blocking: int = 0) -> FixedPointResult:
    """Response-time bound under plain preemptive fixed-priority scheduling."""
    task = taskset.by_id(task_id)
    hps = hp_tasks(taskset, task)

    def f(r: int) -> int:
        return task.wcet + blocking + interference(hps, r)

    return fixed_point(f, task.wcet + blocking, task.deadline)


def max_tolerable_blocking(taskset: TaskSet, task_id: int) -> int:
    """Largest B >= 0 the task can absorb and still meet its deadline.

    Linear scan from 0 upward; B is bounded by D_i - C_i.  Raises
    AnalysisError when even B = 0 is unschedulable.
    """
    task = taskset.by_id(task_id)
    if rta_baseline(taskset, task_id, blocking=0).diverged:
        raise AnalysisError(f"NotSchedulable: task {task_id} misses deadlines at B=0")
    best = 0
    for b in range(1, task.deadline - task.wcet + 1):
        if rta_baseline(taskset, task_id, blocking=b).diverged:
            break
        best = b
    return best


def analyze_baseline(taskset: TaskSet) -> RtaReport:
    bounds = {t.id: rta_baseline(taskset, t.id).value for t in taskset.tasks}
    ok = all(v is not None for v in bounds.values())
    return RtaReport(mode=Mode.BASELINE, bounds=bounds, schedulable=ok)
