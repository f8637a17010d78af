"""Response-time analysis when trusted tasks may execute inside windows.

Untrusted tasks are still blocked during the victim's windows, so their
bounds charge the uncovered window time; trusted tasks below the victim can
reclaim window time, bounded by the budget functions below.

Per class of the task under analysis (relative to victim v, window Omega):

  trusted hp / victim:
      R = C_i + sum_{thp(i)} ceil(R/T_j) C_j + sum_{uhp(i)} ceil((R+Omega)/T_j) C_j
  untrusted hp:
      R = C_i + Omega + sum_{thp(i)} ceil((R-Omega)/T_j) C_j
                      + sum_{uhp(i)} ceil(R/T_j) C_j
  untrusted lp:
      R = C_i + sum_{hp(i)} ceil(R/T_j) C_j + ceil(R/T_v) * U_i
      U_i = max(0, Omega - sum_{thp(i)} Wmin(j))
  trusted lp: min of
      (a) R = C_i + sum_{thp(i)} ceil(R/T_j) C_j
                  + sum_{uhp(i)} ceil((R+Omega)/T_j) C_j
      (b) least t with  C_i <= lambda_i(t)

Budget machinery: alpha(t) lower-bounds window time in any interval of
length t, beta_j(t) caps what a higher-priority trusted task can reclaim,
and lambda_i(t) = max(0, alpha(t) - sum beta_j(t)) is what is left for the
task under analysis.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import ceil
from typing import Optional

from .rta_core import (
    FixedPointResult,
    fixed_point,
    hp_tasks,
    interference,
    least_satisfying,
)
from .task_model import AnalysisError, Mode, RtaReport, Task, TaskSet


def _ceildiv(a: int, b: int) -> int:
    return -((-a) // b)


class Regime(Enum):
    # Omega < T_v - R_v: consecutive windows cannot touch.
    NON_OVERLAPPING = "non-overlapping"
    # T_v - R_v < Omega < T_v: window pairs may overlap, halving the budget.
    OVERLAPPING = "overlapping"


class Relation(Enum):
    HP_OF_VICTIM = "hp-of-victim"
    LP_OF_VICTIM = "lp-of-victim"
    VICTIM_SELF = "victim-self"


@dataclass(frozen=True)
class TrustedBudget:
    """Minimal guaranteed window supply alpha(t) and its parameters."""

    regime: Regime
    delta: int  # T_v - Omega: longest gap from window end to next victim release
    window: int
    victim_id: int
    victim_priority: int
    victim_period: int
    victim_wcet: int
    victim_response: int

    def alpha(self, t: int) -> int:
        """Least window time inside any interval of length t > 0."""
        t_v, omega = self.victim_period, self.window
        if omega == 0:
            return 0
        if self.regime is Regime.NON_OVERLAPPING:
            return max(0, (t - self.delta) // t_v) * omega
        odd = max(0, (t + t_v - self.delta) // (2 * t_v)) * (t_v - self.victim_response)
        even = max(0, (t - self.delta) // (2 * t_v)) * omega
        return odd + even


def trusted_budget(victim: Task, window: int, victim_response: int) -> TrustedBudget:
    """Build alpha(t) for the victim's window train.

    victim_response must be the trusted-mode victim bound.  The boundary
    Omega = T_v - R_v goes to the non-overlapping regime: touching windows
    do not overlap.
    """
    if window >= victim.period:
        raise AnalysisError(
            f"WindowTooLong: window {window} >= victim period {victim.period}"
        )
    regime = (
        Regime.NON_OVERLAPPING
        if window <= victim.period - victim_response
        else Regime.OVERLAPPING
    )
    return TrustedBudget(
        regime=regime,
        delta=victim.period - window,
        window=window,
        victim_id=victim.id,
        victim_priority=victim.priority,  # type: ignore[arg-type]
        victim_period=victim.period,
        victim_wcet=victim.wcet,
        victim_response=victim_response,
    )


def window_exec_min(task_j: Task, window: int) -> int:
    """Guaranteed execution of a shorter-period task inside one window.

    Worst placement: the window opens right after a job of task_j finished
    and the next job starts as late as possible, losing up to 2*T_j - C_j
    ticks before full jobs are forced inside.
    """
    full_jobs = max(0, _ceildiv(window - 2 * task_j.period + task_j.wcet, task_j.period))
    return full_jobs * task_j.wcet


def window_exec_max(
    task_j: Task,
    window: int,
    relation: Relation,
    victim_response: Optional[int] = None,
) -> int:
    """Most execution a trusted task can place inside a single window.

    HP_OF_VICTIM: released-inside jobs only, min(Omega, ceil(Omega/T_j)*C_j).
    LP_OF_VICTIM: one job per window boundary, min(Omega, C_j) each.
    VICTIM_SELF: spill of the next victim job into the previous window,
    max(0, min(C_v, R_v + Omega - T_v)).
    """
    if relation is Relation.HP_OF_VICTIM:
        return min(window, _ceildiv(window, task_j.period) * task_j.wcet) if window else 0
    if relation is Relation.LP_OF_VICTIM:
        return min(window, task_j.wcet)
    if victim_response is None:
        raise AnalysisError("VICTIM_SELF needs the victim response time")
    return max(0, min(task_j.wcet, victim_response + window - task_j.period))


def budget_consumed(task_j: Task, budget: TrustedBudget, t: int) -> int:
    """Window budget beta_j(t) a higher-priority trusted task may use up."""
    omega = budget.window
    if omega == 0:
        return 0
    if task_j.id == budget.victim_id:
        w_self = window_exec_max(
            task_j, omega, Relation.VICTIM_SELF, budget.victim_response
        )
        return _ceildiv(t, budget.victim_period) * w_self
    if task_j.priority < budget.victim_priority:
        w_max = window_exec_max(task_j, omega, Relation.HP_OF_VICTIM)
        return _ceildiv(budget.alpha(t), omega) * w_max
    # below the victim: at most min(Omega, C_j) per job, jobs counted over t
    return _ceildiv(t + task_j.period - task_j.wcet, task_j.period) * min(
        omega, task_j.wcet
    )


def _trusted_hps(taskset: TaskSet, task: Task) -> list[Task]:
    return [t for t in taskset.tasks if t.priority < task.priority and t.is_trusted]


def _untrusted_hps(taskset: TaskSet, task: Task) -> list[Task]:
    return [t for t in taskset.tasks if t.priority < task.priority and not t.is_trusted]


def _require_victim(taskset: TaskSet) -> tuple[Task, int]:
    if taskset.victim is None:
        raise AnalysisError("NoVictim: trusted analysis needs a victim")
    return taskset.victim_task(), taskset.victim.window


def rta_trusted_hp_trusted(taskset: TaskSet, task_id: int) -> FixedPointResult:
    """Bound for a trusted task above the victim, or for the victim itself.

    Untrusted hp jobs deferred by a window arrive back to back, so their
    interference is counted over R + Omega.
    """
    victim, omega = _require_victim(taskset)
    task = taskset.by_id(task_id)
    if task.id != victim.id and not (task.is_trusted and task.priority < victim.priority):
        raise AnalysisError(f"WrongClass: task {task_id} is not trusted-hp or victim")
    thp = _trusted_hps(taskset, task)
    uhp = _untrusted_hps(taskset, task)

    def f(r: int) -> int:
        return (
            task.wcet
            + interference(thp, r)
            + sum(ceil((r + omega) / j.period) * j.wcet for j in uhp)
        )

    return fixed_point(f, task.wcet, task.deadline)


def rta_trusted_hp_untrusted(taskset: TaskSet, task_id: int) -> FixedPointResult:
    """Bound for an untrusted task above the victim.

    Critical instant: released at a window start (blocked Omega once) while
    trusted hp tasks arrive right after the window end.
    """
    victim, omega = _require_victim(taskset)
    task = taskset.by_id(task_id)
    if task.is_trusted or task.priority >= victim.priority:
        raise AnalysisError(f"WrongClass: task {task_id} is not untrusted-hp")
    thp = _trusted_hps(taskset, task)
    uhp = _untrusted_hps(taskset, task)

    def f(r: int) -> int:
        return (
            task.wcet
            + omega
            + sum(max(0, ceil((r - omega) / j.period)) * j.wcet for j in thp)
            + interference(uhp, r)
        )

    return fixed_point(f, task.wcet + omega, task.deadline)


def uncovered_window(taskset: TaskSet, task_id: int) -> int:
    """Window part no trusted hp task is guaranteed to fill, for task_id."""
    _, omega = _require_victim(taskset)
    task = taskset.by_id(task_id)
    covered = sum(window_exec_min(j, omega) for j in _trusted_hps(taskset, task))
    return max(0, omega - covered)


def rta_trusted_lp_untrusted(taskset: TaskSet, task_id: int) -> FixedPointResult:
    """Bound for an untrusted task below the victim.

    Every window instance blocks the task, but only its uncovered part.
    """
    victim, _ = _require_victim(taskset)
    task = taskset.by_id(task_id)
    if task.is_trusted or task.priority <= victim.priority:
        raise AnalysisError(f"WrongClass: task {task_id} is not untrusted-lp")
    hps = hp_tasks(taskset, task)
    u_i = uncovered_window(taskset, task_id)

    def f(r: int) -> int:
        return task.wcet + interference(hps, r) + ceil(r / victim.period) * u_i

    return fixed_point(f, task.wcet, task.deadline)


def available_trusted(
    taskset: TaskSet,
    task_id: int,
    t: int,
    budget: Optional[TrustedBudget] = None,
) -> int:
    """lambda_i(t): window supply left for a trusted task below the victim.

    The consumed sum runs over every trusted task with higher priority,
    including the victim's own spill-back term.
    """
    victim, omega = _require_victim(taskset)
    task = taskset.by_id(task_id)
    if not task.is_trusted or task.priority <= victim.priority:
        raise AnalysisError(f"WrongClass: task {task_id} is not trusted-lp")
    if budget is None:
        r_v = trusted_victim_response(taskset).value
        if r_v is None:
            return 0
        budget = trusted_budget(victim, omega, r_v)
    consumed = sum(
        budget_consumed(j, budget, t) for j in _trusted_hps(taskset, task)
    )
    return max(0, budget.alpha(t) - consumed)


def trusted_victim_response(taskset: TaskSet) -> FixedPointResult:
    """Victim bound under the trusted policy.

    The interference recurrence (untrusted jobs arriving back to back after
    a window) and the paranoid busy-period analysis are both sound for the
    victim, and neither dominates the other: the recurrence wins for short
    windows, the busy period for long ones.  Take the smaller.
    """
    from .rta_paranoid import rta_paranoid_victim

    a = rta_trusted_hp_trusted(taskset, taskset.victim.victim_id)
    b = rta_paranoid_victim(taskset)
    iters = a.iterations + b.iterations
    if a.value is None:
        return FixedPointResult(value=b.value, iterations=iters)
    if b.value is None:
        return FixedPointResult(value=a.value, iterations=iters)
    return FixedPointResult(value=min(a.value, b.value), iterations=iters)


def rta_trusted_lp_trusted(taskset: TaskSet, task_id: int) -> FixedPointResult:
    """Bound for a trusted task below the victim.

    Two sound bounds, take the smaller: the interference recurrence (the
    task runs like any preemptive task; windows never block it), and the
    pure-budget bound (window supply lambda_i alone suffices to run the
    whole job).  Blending lambda_i into the recurrence as a subtraction is
    not sound: the reclaimed window ticks displace untrusted work into the
    remaining schedule instead of removing it.
    """
    victim, omega = _require_victim(taskset)
    task = taskset.by_id(task_id)
    if not task.is_trusted or task.priority <= victim.priority:
        raise AnalysisError(f"WrongClass: task {task_id} is not trusted-lp")
    thp = _trusted_hps(taskset, task)
    uhp = _untrusted_hps(taskset, task)

    def f_plain(r: int) -> int:
        return (
            task.wcet
            + interference(thp, r)
            + sum(ceil((r + omega) / j.period) * j.wcet for j in uhp)
        )

    plain = fixed_point(f_plain, task.wcet, task.deadline)
    if omega == 0:
        return plain

    r_v = trusted_victim_response(taskset).value
    if r_v is None:
        return plain

    budget = trusted_budget(victim, omega, r_v)
    iters = plain.iterations
    limit = plain.value - 1 if plain.value is not None else task.deadline
    for t in range(max(task.wcet, 1), limit + 1):
        iters += 1
        if task.wcet <= available_trusted(taskset, task_id, t, budget=budget):
            return FixedPointResult(value=t, iterations=iters)
    return FixedPointResult(value=plain.value, iterations=iters)


def analyze_trusted(taskset: TaskSet) -> RtaReport:
    """Dispatch every task to its class-specific trusted-mode analysis."""
    victim, _ = _require_victim(taskset)
    bounds: dict[int, Optional[int]] = {}
    for t in taskset.tasks:
        if t.id == victim.id:
            bounds[t.id] = trusted_victim_response(taskset).value
        elif t.priority < victim.priority:
            if t.is_trusted:
                bounds[t.id] = rta_trusted_hp_trusted(taskset, t.id).value
            else:
                bounds[t.id] = rta_trusted_hp_untrusted(taskset, t.id).value
        else:
            if t.is_trusted:
                bounds[t.id] = rta_trusted_lp_trusted(taskset, t.id).value
            else:
                bounds[t.id] = rta_trusted_lp_untrusted(taskset, t.id).value
    ok = all(v is not None for v in bounds.values())
    return RtaReport(mode=Mode.TRUSTED, bounds=bounds, schedulable=ok)


# Re-export for callers that phrase checks in class terms.
__all__ = [
    "Regime",
    "Relation",
    "TrustedBudget",
    "trusted_budget",
    "window_exec_min",
    "window_exec_max",
    "budget_consumed",
    "available_trusted",
    "uncovered_window",
    "rta_trusted_hp_trusted",
    "rta_trusted_hp_untrusted",
    "rta_trusted_lp_untrusted",
    "rta_trusted_lp_trusted",
    "trusted_victim_response",
    "analyze_trusted",
]
