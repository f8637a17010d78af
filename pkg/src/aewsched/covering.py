"""Exact window-covering decision for harmonic tasksets.

Setting: harmonic periods (pairwise dividing), constant execution times,
criticality-monotonic priorities (every trusted task above every untrusted
one).  Windows then recur at the same relative position in every victim
period, and coverage can be decided from two concrete-schedule response
times:

  R    the schedule-exact response time of a task
  R+   the same with the task's execution inflated by one tick

Conditions, with E = min(R_v + Omega, T_v) the part of the window that
needs explicit coverage (from the next victim release until that job
completes the processor only runs trusted work, so any window tail past
T_v is covered for free):

  covered by hp(v)        iff  R_v+ >  E
  covered via tau in tlp  iff  R_tau+ >  I_tv + T_tau - T_v + E

I_tv is the initial-offset difference (positive when tau starts earlier
than the victim).  Every trusted task below the victim is a candidate
witness, lowest priority first; one firing condition suffices.  With
integer ticks the inflated job lands on the first tick the relevant
higher-priority work leaves free, so "completion past the window end"
reads as a strict inequality in both conditions.  The hp condition must be
tested first: a window covered by hp tasks alone can leave every R_tau+
short of its threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from .simulator import PolicyKind, metrics, simulate
from .task_model import AnalysisError, Task, TaskSet, hyperperiod


class Witness(Enum):
    BY_HP = "by-hp"
    BY_LP = "by-lp"
    NOT_COVERED = "not-covered"


@dataclass(frozen=True)
class CoverVerdict:
    covered: bool
    witness: Witness
    exact_response: int
    inflated_response: int
    threshold: int
    victim_response: int
    victim_inflated_response: int


class NotHarmonic(AnalysisError):
    pass


class Unschedulable(AnalysisError):
    pass


class PriorityInterleaving(AnalysisError):
    pass


def is_harmonic(taskset: TaskSet) -> bool:
    periods = sorted({t.period for t in taskset.tasks})
    return all(b % a == 0 for a, b in zip(periods, periods[1:]))


def _criticality_monotonic(taskset: TaskSet) -> bool:
    trusted_prios = [t.priority for t in taskset.tasks if t.is_trusted]
    untrusted_prios = [t.priority for t in taskset.tasks if not t.is_trusted]
    if not trusted_prios or not untrusted_prios:
        return True
    return max(trusted_prios) < min(untrusted_prios)


def _inflated(taskset: TaskSet, task_id: int) -> TaskSet:
    tasks = tuple(
        Task(
            id=t.id,
            wcet=t.wcet + 1 if t.id == task_id else t.wcet,
            period=t.period,
            offset=t.offset,
            priority=t.priority,
            trust=t.trust,
        )
        for t in taskset.tasks
    )
    return TaskSet(tasks=tasks, victim=taskset.victim)


def _response(taskset: TaskSet, task_id: int, allow_misses: bool) -> int:
    """Max job response over two hyperperiods of the concrete schedule.

    Two hyperperiods absorb offset transients; for a schedulable harmonic
    set all jobs of a task respond equally anyway.  When misses are allowed
    (inflated schedules may overload) a task that never completes a job
    reports an effectively infinite response.
    """
    horizon = 2 * hyperperiod(taskset)
    trace = simulate(taskset, PolicyKind.BASELINE, horizon)
    if not allow_misses and trace.misses:
        first = trace.misses[0]
        raise Unschedulable(
            f"Unschedulable: task {first[1]} misses a deadline at tick {first[0]}"
        )
    worst = metrics(trace, taskset).worst_response[task_id]
    if worst is None:
        return 10 * horizon  # never completed: beyond any covering threshold
    return worst


def exact_response(taskset: TaskSet, task_id: int, inflate: bool = False) -> int:
    """Schedule-exact response time (R, or R+ when inflate) of one task."""
    if not is_harmonic(taskset):
        raise NotHarmonic("NotHarmonic: periods must pairwise divide")
    ts = _inflated(taskset, task_id) if inflate else taskset
    return _response(ts, task_id, allow_misses=False)


def fully_covered(taskset: TaskSet) -> CoverVerdict:
    """Decide whether trusted tasks fill every window instance.

    Checks the hp condition first, then the lowest-priority trusted task's
    condition.  The uninflated schedule must be feasible; inflated runs may
    overload and are read optimistically (a never-finishing inflated job
    proves the machine is saturated with trusted work past every window).
    """
    if taskset.victim is None:
        raise AnalysisError("NoVictim: covering needs a victim")
    if not is_harmonic(taskset):
        raise NotHarmonic("NotHarmonic: periods must pairwise divide")
    if not _criticality_monotonic(taskset):
        raise PriorityInterleaving(
            "PriorityInterleaving: trusted tasks must outrank untrusted ones"
        )

    victim = taskset.victim_task()
    omega = taskset.victim.window

    r_v = _response(taskset, victim.id, allow_misses=False)
    r_v_plus = _response(_inflated(taskset, victim.id), victim.id, allow_misses=True)
    explicit_end = min(r_v + omega, victim.period)

    if omega == 0 or r_v_plus > explicit_end:
        return CoverVerdict(
            covered=True,
            witness=Witness.BY_HP,
            exact_response=r_v,
            inflated_response=r_v_plus,
            threshold=explicit_end,
            victim_response=r_v,
            victim_inflated_response=r_v_plus,
        )

    trusted_below = sorted(
        (t for t in taskset.tasks if t.is_trusted and t.priority > victim.priority),
        key=lambda t: -t.priority,
    )
    last = (r_v, r_v_plus, explicit_end)
    for cand in trusted_below:
        i_tv = victim.offset - cand.offset
        threshold = i_tv + cand.period - victim.period + explicit_end
        r_t = _response(taskset, cand.id, allow_misses=False)
        r_t_plus = _response(_inflated(taskset, cand.id), cand.id, allow_misses=True)
        if cand is trusted_below[0]:
            last = (r_t, r_t_plus, threshold)
        if r_t_plus > threshold:
            return CoverVerdict(
                covered=True,
                witness=Witness.BY_LP,
                exact_response=r_t,
                inflated_response=r_t_plus,
                threshold=threshold,
                victim_response=r_v,
                victim_inflated_response=r_v_plus,
            )
    return CoverVerdict(
        covered=False,
        witness=Witness.NOT_COVERED,
        exact_response=last[0],
        inflated_response=last[1],
        threshold=last[2],
        victim_response=r_v,
        victim_inflated_response=r_v_plus,
    )
