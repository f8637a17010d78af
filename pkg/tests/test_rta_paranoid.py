import itertools
import math

import pytest

from aewsched.rta_core import analyze_baseline
from aewsched.rta_paranoid import (
    analyze_paranoid,
    rta_paranoid_nonvictim,
    rta_paranoid_victim,
)
from aewsched.simulator import metrics, simulate
from aewsched.task_model import (
    AnalysisError,
    Task,
    TaskSet,
    Trust,
    VictimConfig,
    tasks_from_tuples,
    validate,
)

from helpers import hyperperiod_of, random_victimized


def _with_offsets(ts, offsets):
    tasks = tuple(
        Task(t.id, t.wcet, t.period, offset=o, priority=t.priority, trust=t.trust)
        for t, o in zip(ts.tasks, offsets)
    )
    return TaskSet(tasks=tasks, victim=ts.victim)


def _phasing_sweep_worst(ts, policy="paranoid"):
    """Worst observed response per task over every offset combination."""
    h = hyperperiod_of(ts)
    worst = {t.id: 0 for t in ts.tasks}
    ranges = [range(t.period) for t in ts.tasks]
    for offsets in itertools.product(*ranges):
        trace = simulate(_with_offsets(ts, offsets), policy, 2 * h)
        m = metrics(trace, ts)
        for tid, r in m.worst_response.items():
            if r is not None:
                worst[tid] = max(worst[tid], r)
    return worst


def test_hp_task_example():
    # hp task over victim (4,9) with window 2: R = C + window = 4
    ts = tasks_from_tuples([(2, 6), (4, 9, Trust.TRUSTED)], victim_id=2, window=2)
    assert rta_paranoid_nonvictim(ts, 1).value == 4
    worst = _phasing_sweep_worst(ts)
    assert worst[1] <= 4


def test_lp_task_example():
    ts = tasks_from_tuples([(1, 5, Trust.TRUSTED), (1, 10)], victim_id=1, window=1)
    assert rta_paranoid_nonvictim(ts, 2).value == 3
    worst = _phasing_sweep_worst(ts)
    assert worst[2] <= 3


def test_zero_window_reduces_to_baseline():
    for ts in itertools.islice(random_victimized(40, seed=5), 40):
        ts0 = validate(TaskSet(tasks=ts.tasks, victim=VictimConfig(ts.victim.victim_id, 0)))
        par = analyze_paranoid(ts0)
        base = analyze_baseline(ts0)
        assert par.bounds == base.bounds


def test_victim_busy_period_worked_example():
    # victim (4,9) with window 2 under hp task (2,6): two instances in the
    # busy period finish at 6 and 16, responses 6 and 7
    ts = tasks_from_tuples([(2, 6), (4, 9, Trust.TRUSTED)], victim_id=2, window=2)
    r = rta_paranoid_victim(ts)
    assert r.value == 7
    assert r.busy_period == 18
    assert r.finish_times == (6, 16)
    assert len(r.finish_times) == math.ceil(r.busy_period / 9)


def test_victim_alone_short_window():
    ts = tasks_from_tuples([(2, 10, Trust.TRUSTED)], victim_id=1, window=3)
    r = rta_paranoid_victim(ts)
    assert r.value == 2  # single instance in the busy period
    assert r.finish_times == (2,)


def test_victim_phasing_sweep_oracle():
    # harmonic 3-task set, all offsets varied over one period each
    ts = tasks_from_tuples(
        [(1, 4), (2, 8, Trust.TRUSTED), (3, 16)], victim_id=2, window=2
    )
    bound = rta_paranoid_victim(ts).value
    assert bound is not None
    worst = _phasing_sweep_worst(ts)
    assert worst[2] <= bound


def test_window_monotonicity():
    for ts in itertools.islice(random_victimized(25, seed=9), 25):
        vid = ts.victim.victim_id
        t_v = ts.by_id(vid).period
        prev = {t.id: 0 for t in ts.tasks}
        for w in sorted({0, ts.victim.window, max(0, t_v - 1)}):
            tsw = validate(TaskSet(tasks=ts.tasks, victim=VictimConfig(vid, w)))
            rep = analyze_paranoid(tsw)
            for tid, b in rep.bounds.items():
                cur = b if b is not None else 10 ** 9
                assert cur >= prev[tid]
                prev[tid] = cur


def test_victim_errors():
    ts = tasks_from_tuples([(1, 4)], victim_id=None)
    with pytest.raises(AnalysisError):
        rta_paranoid_victim(ts)
    tsv = tasks_from_tuples([(1, 4, Trust.TRUSTED)], victim_id=1, window=1)
    with pytest.raises(AnalysisError):
        rta_paranoid_nonvictim(tsv, 1)


def test_paranoid_soundness_sample():
    # the acceptance suite runs the full 10^3 sweep; keep a quick guard here
    from aewsched._fast import fast_sim

    for ts in itertools.islice(random_victimized(150, seed=31), 150):
        rep = analyze_paranoid(ts)
        if not rep.schedulable:
            continue
        f = fast_sim(ts, "paranoid", hyperperiod_of(ts))
        assert not f["missed"]
        for i, t in enumerate(ts.tasks):
            if f["worst"][i] >= 0:
                assert f["worst"][i] <= rep.bounds[t.id]
