"""Two-level container scheduler simulation.

Level one hands the processor to whole containers: per global period every
container owns a runtime budget, the running container cannot be preempted
by tasks outside it, and it is descheduled only when its budget is used up
or it has no ready task.  Budgets replenish at every period boundary, which
is also a fresh selection instant.  A container descheduled for emptiness
keeps its leftover budget and may be picked again when members wake up, so
the slot order degenerates to TDMA under assigned container priorities and
to a timed token ring otherwise.

Level two schedules the running container's members among themselves by
fixed priority, preemptively.

Container priority is its fixed priority when assigned; otherwise it is
inherited from the highest-priority ready member, re-evaluated only at
selection instants.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .simulator import Trace
from .task_model import AnalysisError, TaskSet, ValidationError


@dataclass(frozen=True)
class Container:
    id: int
    budget: int  # runtime ticks per global period
    period: int  # global period, identical across containers
    task_ids: tuple[int, ...]
    fixed_priority: Optional[int] = None


def validate_containers(containers: list[Container], taskset: TaskSet) -> None:
    if not containers:
        raise ValidationError(["EmptyContainers: need at least one container"])
    period = containers[0].period
    issues = []
    if any(c.period != period for c in containers):
        issues.append("PeriodMismatch: all containers share one global period")
    if sum(c.budget for c in containers) > period:
        issues.append("BudgetOverflow: budgets exceed the global period")
    if any(c.budget < 0 for c in containers):
        issues.append("BadBudget: budgets must be non-negative")
    ids = [c.id for c in containers]
    if len(set(ids)) != len(ids):
        issues.append("DuplicateContainer: container ids must be unique")
    assigned = [tid for c in containers for tid in c.task_ids]
    if len(set(assigned)) != len(assigned):
        issues.append("OrphanTask: a task appears in two containers")
    members = set(assigned)
    for t in taskset.tasks:
        if t.id not in members:
            issues.append(f"OrphanTask: task {t.id} belongs to no container")
    for tid in members:
        try:
            taskset.by_id(tid)
        except KeyError:
            issues.append(f"UnknownTask: container member {tid} not in task set")
    if issues:
        raise ValidationError(issues)


def simulate_two_level(
    containers: list[Container], taskset: TaskSet, horizon: int
) -> Trace:
    """Simulate the container schedule and return a task-level trace."""
    if horizon <= 0:
        raise AnalysisError("HorizonZero: horizon must be positive")
    validate_containers(containers, taskset)
    period = containers[0].period
    tasks = taskset.tasks
    n = len(tasks)
    ncont = len(containers)

    cont_of = {}
    for ci, c in enumerate(containers):
        for tid in c.task_ids:
            cont_of[taskset.index_of(tid)] = ci

    next_rel = [t.offset for t in tasks]
    head_rel = [0] * n
    head_rem = [0] * n
    pending = [0] * n

    budget_left = [c.budget for c in containers]
    current = -1

    segments: list[tuple[int, int, Optional[int]]] = []
    releases: list[tuple[int, int]] = []
    completions: list[tuple[int, int, int]] = []
    misses: list[tuple[int, int]] = []
    seg_start, seg_ent = 0, -2

    def ready_member(ci: int) -> int:
        for i in range(n):
            if pending[i] > 0 and cont_of[i] == ci:
                return i
        return -1

    for t in range(horizon):
        if t % period == 0:
            budget_left = [c.budget for c in containers]
            current = -1  # period boundary is a fresh selection instant

        for i in range(n):
            if next_rel[i] == t:
                if pending[i] > 0:
                    misses.append((t, tasks[i].id))
                else:
                    head_rel[i] = t
                    head_rem[i] = tasks[i].wcet
                pending[i] += 1
                releases.append((t, tasks[i].id))
                next_rel[i] += tasks[i].period

        if current >= 0:
            if budget_left[current] == 0 or ready_member(current) < 0:
                current = -1

        if current < 0:
            best_key = None
            for ci, c in enumerate(containers):
                if budget_left[ci] == 0:
                    continue
                top = ready_member(ci)
                if top < 0:
                    continue
                prio = c.fixed_priority if c.fixed_priority is not None else (
                    tasks[top].priority
                )
                key = (prio, ci)
                if best_key is None or key < best_key:
                    best_key, current = key, ci

        sel = ready_member(current) if current >= 0 else -1
        ent = tasks[sel].id if sel >= 0 else None
        if ent != seg_ent:
            if seg_ent != -2:
                segments.append((seg_start, t, seg_ent))
            seg_start, seg_ent = t, ent

        if sel >= 0:
            budget_left[current] -= 1
            head_rem[sel] -= 1
            if head_rem[sel] == 0:
                completions.append((t + 1, tasks[sel].id, head_rel[sel]))
                pending[sel] -= 1
                if pending[sel] > 0:
                    head_rel[sel] += tasks[sel].period
                    head_rem[sel] = tasks[sel].wcet

    if seg_ent != -2:
        segments.append((seg_start, horizon, seg_ent))

    for i in range(n):
        if pending[i] > 0:
            d = horizon - head_rel[i]
            p = tasks[i].period
            if d >= p and d % p == 0 and d // p <= pending[i]:
                misses.append((horizon, tasks[i].id))

    return Trace(
        horizon=horizon,
        segments=segments,
        releases=releases,
        completions=completions,
        misses=misses,
        window_intervals=[],
    )


def runtime_per_period(trace: Trace, containers: list[Container], taskset: TaskSet,
                       periods: int) -> dict[int, list[int]]:
    """Ticks each container actually ran in each of the first `periods` periods."""
    period = containers[0].period
    cont_of_task = {tid: c.id for c in containers for tid in c.task_ids}
    out = {c.id: [0] * periods for c in containers}
    for s, e, ent in trace.segments:
        if ent is None:
            continue
        cid = cont_of_task[ent]
        for tick in range(s, min(e, periods * period, trace.horizon)):
            out[cid][tick // period] += 1
    return out


# Container config file: container_id,budget,fixed_priority_or_-,task_ids
# (task ids separated by semicolons).  Comments start with '#'.


def parse_containers(text: str, period: int) -> list[Container]:
    containers = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 4:
            raise ValidationError(
                [f"BadLine: container line {lineno} has {len(fields)} fields, expected 4"]
            )
        cid, budget, prio_s, members = fields
        prio = None if prio_s == "-" else int(prio_s)
        task_ids = tuple(int(x) for x in members.split(";") if x)
        containers.append(
            Container(
                id=int(cid),
                budget=int(budget),
                period=period,
                task_ids=task_ids,
                fixed_priority=prio,
            )
        )
    return containers


def read_containers(path, period: int) -> list[Container]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_containers(fh.read(), period)
