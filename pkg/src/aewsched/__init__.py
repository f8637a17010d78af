"""Schedulability analysis and schedule simulation for fixed-priority
tasksets protected by post-completion attack-effective windows."""

from .task_model import (
    Mode,
    RtaReport,
    Task,
    TaskClasses,
    TaskSet,
    Trust,
    ValidationError,
    VictimConfig,
    assign_rm,
    classify,
    hyperperiod,
    read_taskset,
    validate,
    write_taskset,
)
from .rta_core import FixedPointResult, analyze_baseline, max_tolerable_blocking, rta_baseline
from .rta_paranoid import analyze_paranoid, rta_paranoid_nonvictim, rta_paranoid_victim
from .rta_trusted import analyze_trusted
from .simulator import Policy, PolicyKind, Trace, TraceMetrics, metrics, simulate
from .covering import CoverVerdict, Witness, exact_response, fully_covered
from .container_sim import Container, simulate_two_level
from .generator import GenParams, VictimPosition, gen_harmonic, gen_taskset, uunifast

__version__ = "0.1.0"
