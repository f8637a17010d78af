"""Array-level simulation/analysis kernels for bulk experiment runs.

Same semantics as simulator.simulate and rta_core, restated over flat
arrays so numba can compile the hot loops; without numba the pure-Python
versions still run (slowly).  Tasks arrive priority-sorted: index 0 is the
highest priority.  The equivalence with the object-level implementations is
pinned by tests.
"""

from __future__ import annotations

import os

import numpy as np

from .task_model import TaskSet, Trust

try:  # pragma: no cover - exercised implicitly
    if os.environ.get("AEWSCHED_NO_JIT"):
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


BASELINE, PARANOID, TRUSTED, CO = 0, 1, 2, 3

_POLICY_CODE = {"baseline": BASELINE, "paranoid": PARANOID, "trusted": TRUSTED, "co": CO}


@njit(cache=True)
def sim_kernel(C, T, PHI, untrusted, B, policy, victim, omega, horizon,
               stop_on_miss, worst, miss_count, ticks, record):
    n = C.shape[0]
    next_rel = PHI.copy()
    head_rel = np.zeros(n, np.int64)
    head_rem = np.zeros(n, np.int64)
    pend = np.zeros(n, np.int64)
    acc = np.zeros(n, np.int64)
    for i in range(n):
        worst[i] = -1
        miss_count[i] = 0
    w_end = 0
    untr_w = 0
    tot_w = 0
    missed = 0

    t = 0
    while t < horizon:
        for i in range(n):
            if next_rel[i] == t:
                if pend[i] > 0:
                    miss_count[i] += 1
                    missed = 1
                    if stop_on_miss:
                        return missed, untr_w, tot_w
                else:
                    head_rel[i] = t
                    head_rem[i] = C[i]
                    acc[i] = 0
                pend[i] += 1
                next_rel[i] += T[i]

        in_w = t < w_end
        s = -1
        if policy == BASELINE or ((policy == PARANOID or policy == TRUSTED) and not in_w):
            for i in range(n):
                if pend[i] > 0:
                    s = i
                    break
        elif policy == PARANOID:
            if pend[victim] > 0:
                s = victim
        elif policy == TRUSTED:
            for i in range(n):
                if pend[i] > 0 and untrusted[i] == 0:
                    s = i
                    break
        else:  # coverage oriented
            for i in range(n):
                if pend[i] > 0 and acc[i] >= B[i]:
                    s = i
                    break
            if s == -1:
                if pend[victim] > 0:
                    for i in range(victim):
                        if pend[i] > 0 and untrusted[i] == 1:
                            s = i
                            break
                    if s == -1:
                        s = victim
                else:
                    for i in range(n):
                        if pend[i] > 0 and untrusted[i] == 0:
                            s = i
                            break

        if policy == CO:
            for i in range(n):
                if pend[i] > 0 and i != s:
                    acc[i] += 1

        if record:
            ticks[t] = s
        if s >= 0:
            if in_w and untrusted[s] == 1:
                untr_w += 1
            head_rem[s] -= 1
            if head_rem[s] == 0:
                ct = t + 1
                r = ct - head_rel[s]
                if head_rel[s] + T[s] <= horizon and r > worst[s]:
                    worst[s] = r
                pend[s] -= 1
                if pend[s] > 0:
                    head_rel[s] += T[s]
                    head_rem[s] = C[s]
                    acc[s] = 0
                if s == victim and omega > 0:
                    e = ct + omega
                    lo = ct if ct > w_end else w_end
                    hi = e if e < horizon else horizon
                    if hi > lo:
                        tot_w += hi - lo
                    if e > w_end:
                        w_end = e
        t += 1

    for i in range(n):
        if pend[i] > 0:
            d = horizon - head_rel[i]
            if d >= T[i] and d % T[i] == 0 and d // T[i] <= pend[i]:
                miss_count[i] += 1
                missed = 1
    return missed, untr_w, tot_w


@njit(cache=True)
def rta_kernel(C, T, i, blocking):
    """Least fixed point of C_i + blocking + interference, or -1 past D_i."""
    d = T[i]
    r = C[i] + blocking
    while r <= d:
        nxt = C[i] + blocking
        for j in range(i):
            nxt += ((r + T[j] - 1) // T[j]) * C[j]
        if nxt == r:
            return r
        r = nxt
    return -1


@njit(cache=True)
def budgets_kernel(C, T, out):
    """Max tolerable blocking per task; 0 when unschedulable at B = 0.

    Binary search over B (feasibility is monotone in B); same values as
    rta_core.max_tolerable_blocking.
    """
    n = C.shape[0]
    for i in range(n):
        if rta_kernel(C, T, i, 0) < 0:
            out[i] = 0
            continue
        lo = 0
        hi = T[i] - C[i]
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if rta_kernel(C, T, i, mid) < 0:
                hi = mid - 1
            else:
                lo = mid
        out[i] = lo


def arrays_for(taskset: TaskSet):
    """Flatten a validated taskset into kernel inputs (priority order)."""
    tasks = taskset.tasks
    C = np.array([t.wcet for t in tasks], np.int64)
    T = np.array([t.period for t in tasks], np.int64)
    PHI = np.array([t.offset for t in tasks], np.int64)
    untrusted = np.array(
        [0 if t.trust is Trust.TRUSTED else 1 for t in tasks], np.uint8
    )
    victim = -1
    omega = 0
    if taskset.victim is not None:
        victim = taskset.index_of(taskset.victim.victim_id)
        omega = taskset.victim.window
    return C, T, PHI, untrusted, victim, omega


def fast_sim(taskset: TaskSet, policy: str, horizon: int, stop_on_miss: bool = False,
             record: bool = False):
    """Convenience wrapper used by tests; experiments drive the kernel raw."""
    C, T, PHI, untrusted, victim, omega = arrays_for(taskset)
    n = C.shape[0]
    code = _POLICY_CODE[policy]
    B = np.zeros(n, np.int64)
    if code == CO:
        budgets_kernel(C, T, B)
    worst = np.empty(n, np.int64)
    miss_count = np.empty(n, np.int64)
    ticks = np.empty(horizon if record else 1, np.int64)
    missed, untr_w, tot_w = sim_kernel(
        C, T, PHI, untrusted, B, code, victim, omega, horizon,
        stop_on_miss, worst, miss_count, ticks, record,
    )
    return {
        "missed": bool(missed),
        "untrusted_in_window": int(untr_w),
        "total_window": int(tot_w),
        "worst": worst,
        "miss_count": miss_count,
        "ticks": ticks if record else None,
    }
