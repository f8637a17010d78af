"""Core task-set model: periodic tasks, trust classes, victim/window config.

Tasks follow the classic periodic model (C_i, T_i, phi_i) with implicit
deadline D_i = T_i and unique fixed priorities (1 = highest).  Every quantity
is an integer tick.  A task set may designate a single *victim* task whose
job completions each open a protection window of `window` ticks during which
untrusted execution is considered dangerous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional


class Trust(Enum):
    TRUSTED = "T"
    UNTRUSTED = "U"


class Mode(Enum):
    """Analysis mode for response-time reports."""

    BASELINE = "baseline"
    PARANOID = "paranoid"
    TRUSTED = "trusted"


# Hyperperiods beyond this are useless for exact tick simulation.
MAX_HYPERPERIOD = 10 ** 12


class ValidationError(ValueError):
    """Raised by validate(); carries every violated constraint."""

    def __init__(self, issues: list[str]):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


class AnalysisError(ValueError):
    """Raised when an analysis operation is applied outside its domain."""


@dataclass(frozen=True)
class Task:
    id: int
    wcet: int
    period: int
    offset: int = 0
    priority: Optional[int] = None
    trust: Trust = Trust.UNTRUSTED

    @property
    def deadline(self) -> int:
        return self.period

    @property
    def utilization(self) -> float:
        return self.wcet / self.period

    @property
    def is_trusted(self) -> bool:
        return self.trust is Trust.TRUSTED


@dataclass(frozen=True)
class VictimConfig:
    victim_id: int
    window: int  # ticks, 0 <= window < victim period


@dataclass(frozen=True)
class TaskSet:
    tasks: tuple[Task, ...]
    victim: Optional[VictimConfig] = None

    def __iter__(self):
        return iter(self.tasks)

    def __len__(self) -> int:
        return len(self.tasks)

    def by_id(self, task_id: int) -> Task:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(f"no task with id {task_id}")

    def index_of(self, task_id: int) -> int:
        for k, t in enumerate(self.tasks):
            if t.id == task_id:
                return k
        raise KeyError(f"no task with id {task_id}")

    def victim_task(self) -> Task:
        if self.victim is None:
            raise AnalysisError("task set has no victim")
        return self.by_id(self.victim.victim_id)

    @property
    def window(self) -> int:
        return self.victim.window if self.victim is not None else 0

    def total_utilization(self) -> float:
        return sum(t.wcet / t.period for t in self.tasks)


@dataclass(frozen=True)
class TaskClasses:
    """Priority/trust partition of a task set relative to one task."""

    hp: frozenset[int]
    lp: frozenset[int]
    thp: frozenset[int]
    tlp: frozenset[int]
    uhp: frozenset[int]
    ulp: frozenset[int]


@dataclass(frozen=True)
class RtaReport:
    mode: Mode
    bounds: dict[int, Optional[int]]  # task id -> response bound, None if unschedulable
    schedulable: bool


def assign_rm(taskset: TaskSet) -> TaskSet:
    """Assign rate-monotonic priorities (shorter period first).

    Period ties go to the lower task id, except that the victim beats every
    task sharing its period: a trusted task must not run before a same-period
    victim, and letting the victim win all its ties keeps the order total.
    """
    victim_id = taskset.victim.victim_id if taskset.victim is not None else None

    def key(t: Task):
        return (t.period, 0 if t.id == victim_id else 1, t.id)

    ordered = sorted(taskset.tasks, key=key)
    tasks = tuple(replace(t, priority=k + 1) for k, t in enumerate(ordered))
    return TaskSet(tasks=tasks, victim=taskset.victim)


def validate(taskset: TaskSet) -> TaskSet:
    """Check model constraints and return the canonical (priority-sorted) set.

    Collects every violation instead of stopping at the first.  Priorities
    are renumbered densely 1..n preserving their order.  A set with no
    priorities at all gets rate-monotonic ones.
    """
    issues: list[str] = []
    tasks = list(taskset.tasks)
    if not tasks:
        raise ValidationError(["EmptyTaskSet: task set has no tasks"])

    ids = [t.id for t in tasks]
    if len(set(ids)) != len(ids):
        issues.append("DuplicateId: task ids must be unique")

    for t in tasks:
        if t.wcet < 1:
            issues.append(f"BadWcet: task {t.id} wcet {t.wcet} < 1")
        if t.period < 1:
            issues.append(f"BadPeriod: task {t.id} period {t.period} < 1")
        if t.wcet > t.period:
            issues.append(
                f"WcetExceedsPeriod: task {t.id} wcet {t.wcet} > period {t.period}"
            )
        if not (0 <= t.offset < max(t.period, 1)):
            issues.append(f"BadOffset: task {t.id} offset {t.offset} not in [0, period)")

    prios = [t.priority for t in tasks]
    if all(p is None for p in prios):
        if issues:
            raise ValidationError(issues)
        return validate(assign_rm(taskset))
    if any(p is None for p in prios):
        issues.append("MissingPriority: either all or no tasks may carry priorities")
    else:
        if len(set(prios)) != len(prios):
            issues.append("DuplicatePriority: priorities must be unique")

    victim = taskset.victim
    if victim is not None:
        try:
            vt = taskset.by_id(victim.victim_id)
        except KeyError:
            vt = None
            issues.append(f"UnknownTask: victim id {victim.victim_id} not in task set")
        if vt is not None:
            if vt.trust is not Trust.TRUSTED:
                issues.append(f"VictimUntrusted: victim task {vt.id} must be trusted")
            if victim.window >= vt.period:
                issues.append(
                    f"WindowTooLong: window {victim.window} >= victim period {vt.period}"
                )
        if victim.window < 0:
            issues.append(f"BadWindow: window {victim.window} < 0")

    if issues:
        raise ValidationError(issues)

    ordered = sorted(tasks, key=lambda t: t.priority)  # type: ignore[arg-type]
    canonical = tuple(replace(t, priority=k + 1) for k, t in enumerate(ordered))
    return TaskSet(tasks=canonical, victim=victim)


def classify(taskset: TaskSet, ref_id: int) -> TaskClasses:
    """Partition every other task by priority order and trust, relative to ref_id."""
    ref = taskset.by_id(ref_id)  # raises KeyError (UnknownTask) if absent
    hp, lp, thp, tlp, uhp, ulp = set(), set(), set(), set(), set(), set()
    for t in taskset.tasks:
        if t.id == ref_id:
            continue
        higher = t.priority < ref.priority  # type: ignore[operator]
        (hp if higher else lp).add(t.id)
        if t.is_trusted:
            (thp if higher else tlp).add(t.id)
        else:
            (uhp if higher else ulp).add(t.id)
    return TaskClasses(
        hp=frozenset(hp),
        lp=frozenset(lp),
        thp=frozenset(thp),
        tlp=frozenset(tlp),
        uhp=frozenset(uhp),
        ulp=frozenset(ulp),
    )


def hyperperiod(taskset: TaskSet) -> int:
    """Least common multiple of all periods; the exact simulation horizon."""
    h = 1
    for t in taskset.tasks:
        h = h * t.period // math.gcd(h, t.period)
        if h > MAX_HYPERPERIOD:
            raise OverflowError(
                f"hyperperiod exceeds {MAX_HYPERPERIOD} ticks; not simulatable"
            )
    return h


# ---------------------------------------------------------------------------
# Task-set file format
#
#   # comment
#   #window=<ticks>
#   id,wcet,period,offset,priority,trust,victim
#
# trust is T or U, victim is 0 or 1, priority may be '-' to request RM
# assignment (then every line must use '-').
# ---------------------------------------------------------------------------


def parse_taskset(text: str) -> TaskSet:
    window: Optional[int] = None
    tasks: list[Task] = []
    victim_ids: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("window"):
                _, _, val = body.partition("=")
                window = int(val.strip())
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 7:
            raise ValidationError(
                [f"BadLine: line {lineno} has {len(fields)} fields, expected 7"]
            )
        tid, wcet, period, offset, prio_s, trust_s, victim_s = fields
        if trust_s not in ("T", "U"):
            raise ValidationError([f"BadTrust: line {lineno} trust must be T or U"])
        prio = None if prio_s == "-" else int(prio_s)
        task = Task(
            id=int(tid),
            wcet=int(wcet),
            period=int(period),
            offset=int(offset),
            priority=prio,
            trust=Trust(trust_s),
        )
        tasks.append(task)
        if victim_s == "1":
            victim_ids.append(task.id)
        elif victim_s != "0":
            raise ValidationError([f"BadVictimFlag: line {lineno} victim must be 0 or 1"])

    if len(victim_ids) > 1:
        raise ValidationError(["MultipleVictims: at most one task may be the victim"])
    victim = None
    if victim_ids:
        victim = VictimConfig(victim_id=victim_ids[0], window=window or 0)
    elif window is not None:
        raise ValidationError(["WindowWithoutVictim: #window given but no victim task"])
    return validate(TaskSet(tasks=tuple(tasks), victim=victim))


def format_taskset(taskset: TaskSet) -> str:
    lines = ["# id,wcet,period,offset,priority,trust,victim"]
    if taskset.victim is not None:
        lines.append(f"#window={taskset.victim.window}")
    vid = taskset.victim.victim_id if taskset.victim is not None else None
    for t in taskset.tasks:
        lines.append(
            f"{t.id},{t.wcet},{t.period},{t.offset},{t.priority},"
            f"{t.trust.value},{1 if t.id == vid else 0}"
        )
    return "\n".join(lines) + "\n"


def read_taskset(path) -> TaskSet:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_taskset(fh.read())


def write_taskset(taskset: TaskSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_taskset(taskset))


def tasks_from_tuples(entries: Iterable[tuple], victim_id=None, window=0) -> TaskSet:
    """Build a validated set from (wcet, period[, trust[, offset]]) tuples.

    Ids follow list order; priorities are rate monotonic.  Convenience for
    tests and examples.
    """
    tasks = []
    for k, entry in enumerate(entries):
        wcet, period = entry[0], entry[1]
        trust = entry[2] if len(entry) > 2 else Trust.UNTRUSTED
        offset = entry[3] if len(entry) > 3 else 0
        tasks.append(Task(id=k + 1, wcet=wcet, period=period, offset=offset, trust=trust))
    victim = VictimConfig(victim_id=victim_id, window=window) if victim_id else None
    return validate(TaskSet(tasks=tuple(tasks), victim=victim))
