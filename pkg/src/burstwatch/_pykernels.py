"""Pure-Python implementations of the hot kernels.

Every function here has a twin in ``_kernels.pyx`` with the same signature and
the same order of floating-point operations, so the two backends agree bit for
bit. ``burstwatch.kernels`` picks one at import time.
"""

import math

import numpy as np

# Lifecycle machine state layout (int64 vector).
PHASE = 0
NEXT_MINUTE = 1
FIRST_SEEN = 2
TRIGGER = 3
C1 = 4
THRESHOLD = 5
ONSET = 6
OFFBURST = 7
LAST_ACTIVE = 8
RUN_START = 9
NEGATIVE = 10
CYCLE = 11
WINDOW_SUM = 12
RING = 13

DORMANT = 0
TRIGGERED = 1
BURSTING = 2
OFFBURST_PHASE = 3

EV_TRIGGERED = 1
EV_BURST = 2
EV_NEGATIVE = 3
EV_OFFBURST = 4
EV_DEATH = 5


def new_state(window, next_minute):
    state = np.zeros(RING + window, dtype=np.int64)
    state[NEXT_MINUTE] = next_minute
    for idx in (FIRST_SEEN, TRIGGER, C1, THRESHOLD, ONSET, OFFBURST, LAST_ACTIVE, RUN_START):
        state[idx] = -1
    return state


def _reset_cycle(st):
    st[PHASE] = DORMANT
    st[FIRST_SEEN] = -1
    st[TRIGGER] = -1
    st[C1] = -1
    st[THRESHOLD] = -1
    st[ONSET] = -1
    st[OFFBURST] = -1
    st[LAST_ACTIVE] = -1
    st[RUN_START] = -1
    st[NEGATIVE] = 0
    st[CYCLE] += 1


def _step(st, minute, count, delta, window, horizon, off_quiet, death_quiet, events):
    slot = RING + minute % window
    st[WINDOW_SUM] += count - st[slot]
    st[slot] = count
    wsum = st[WINDOW_SUM]
    phase = st[PHASE]
    if phase == DORMANT:
        if count > 0 and st[FIRST_SEEN] < 0:
            st[FIRST_SEEN] = minute
        if wsum > delta:
            st[PHASE] = TRIGGERED
            st[TRIGGER] = minute
            st[C1] = count
            st[THRESHOLD] = max(count + delta, (3 * count + 1) // 2)
            st[LAST_ACTIVE] = minute
            events.append((EV_TRIGGERED, minute, minute))
        st[NEXT_MINUTE] = minute + 1
        return
    if wsum > delta:
        st[LAST_ACTIVE] = minute
    if phase == TRIGGERED:
        if st[NEGATIVE] == 0:
            if count > st[THRESHOLD]:
                st[PHASE] = BURSTING
                st[ONSET] = minute
                events.append((EV_BURST, minute, minute))
            elif minute - st[TRIGGER] >= horizon:
                st[NEGATIVE] = 1
                events.append((EV_NEGATIVE, minute, minute))
    elif phase == BURSTING:
        if count < st[THRESHOLD]:
            if st[RUN_START] < 0:
                st[RUN_START] = minute
            if minute - st[RUN_START] + 1 >= off_quiet:
                st[PHASE] = OFFBURST_PHASE
                st[OFFBURST] = st[RUN_START]
                events.append((EV_OFFBURST, minute, st[RUN_START]))
        else:
            st[RUN_START] = -1
    if minute - st[LAST_ACTIVE] >= death_quiet:
        events.append((EV_DEATH, minute, st[LAST_ACTIVE] + 1))
        _reset_cycle(st)
    st[NEXT_MINUTE] = minute + 1


def lifecycle_advance(state, counts, delta, window, horizon, off_quiet, death_quiet):
    """Feed ``counts`` as consecutive minutes starting at ``state[NEXT_MINUTE]``.

    Returns a list of ``(kind, emitted_minute, at_minute)`` tuples.
    """
    st = state
    events = []
    minute = int(st[NEXT_MINUTE])
    for count in counts:
        _step(st, minute, int(count), delta, window, horizon, off_quiet, death_quiet, events)
        minute += 1
    return events


def lifecycle_skip_zeros(state, n, delta, window, horizon, off_quiet, death_quiet):
    """Feed ``n`` silent minutes, jumping over stretches where nothing can fire."""
    st = state
    events = []
    end = int(st[NEXT_MINUTE]) + n
    while st[NEXT_MINUTE] < end:
        minute = int(st[NEXT_MINUTE])
        if st[WINDOW_SUM] != 0:
            _step(st, minute, 0, delta, window, horizon, off_quiet, death_quiet, events)
            continue
        phase = st[PHASE]
        target = end
        if phase != DORMANT:
            target = min(target, int(st[LAST_ACTIVE]) + death_quiet)
            if phase == TRIGGERED and st[NEGATIVE] == 0:
                target = min(target, int(st[TRIGGER]) + horizon)
            elif phase == BURSTING:
                if st[RUN_START] < 0:
                    st[RUN_START] = minute
                target = min(target, int(st[RUN_START]) + off_quiet - 1)
        if target > minute:
            st[NEXT_MINUTE] = target
        if st[NEXT_MINUTE] < end:
            _step(st, int(st[NEXT_MINUTE]), 0, delta, window, horizon, off_quiet, death_quiet, events)
    return events


def derivative_features(series):
    """The eleven time-series derivative features of a count slice.

    Order: mean_value, std_value, d_last_first, d_last_max, d_last_min,
    idx_max, mean_fod, std_fod, last_fod, max_fod, d_pfod_nfod.
    """
    c = [float(v) for v in series]
    n = len(c)
    total = 0.0
    for v in c:
        total += v
    mean = total / n
    ss = 0.0
    for v in c:
        ss += (v - mean) * (v - mean)
    std = math.sqrt(ss / n)
    hi = c[0]
    lo = c[0]
    idx_max = 0
    for j in range(1, n):
        if c[j] > hi:
            hi = c[j]
            idx_max = j
        if c[j] < lo:
            lo = c[j]
    last = c[n - 1]
    out = [mean, std, last - c[0], last - hi, last - lo, float(idx_max),
           0.0, 0.0, 0.0, 0.0, 0.0]
    if n < 2:
        return out
    m = n - 1
    abs_total = 0.0
    max_fod = c[1] - c[0]
    balance = 0
    for j in range(m):
        d = c[j + 1] - c[j]
        abs_total += abs(d)
        if d > max_fod:
            max_fod = d
        if d >= 0:
            balance += 1
        else:
            balance -= 1
    mean_fod = abs_total / m
    ss = 0.0
    for j in range(m):
        a = abs(c[j + 1] - c[j]) - mean_fod
        ss += a * a
    out[6] = mean_fod
    out[7] = math.sqrt(ss / m)
    out[8] = last - c[n - 2]
    out[9] = max_fod
    out[10] = float(balance)
    return out


def best_split(X, y, order, min_leaf):
    """Best variance-reduction split of one CART node.

    ``order`` holds a stable argsort of every column of ``X``. Returns
    ``(feature, threshold, gain)``; ``feature == -1`` when no admissible split
    exists. Ties keep the first feature, then the first cut position.
    """
    n, p = X.shape
    best_feature = -1
    best_threshold = 0.0
    best_gain = 0.0
    if n < 2 * min_leaf:
        return best_feature, best_threshold, best_gain
    for j in range(p):
        idx = order[:, j]
        xs = X[idx, j]
        ys = y[idx]
        cs = np.cumsum(ys)
        cq = np.cumsum(ys * ys)
        s_all = cs[n - 1]
        q_all = cq[n - 1]
        sse_all = q_all - s_all * s_all / n
        lo = min_leaf - 1
        hi = n - min_leaf - 1
        if hi < lo:
            continue
        cut = np.arange(lo, hi + 1)
        nl = (cut + 1).astype(np.float64)
        nr = n - nl
        sl = cs[cut]
        ql = cq[cut]
        sr = s_all - sl
        qr = q_all - ql
        gain = sse_all - (ql - sl * sl / nl) - (qr - sr * sr / nr)
        valid = xs[cut] < xs[cut + 1]
        if not valid.any():
            continue
        gain = np.where(valid, gain, -np.inf)
        k = int(np.argmax(gain))
        if gain[k] > best_gain:
            best_gain = float(gain[k])
            best_feature = j
            best_threshold = (xs[cut[k]] + xs[cut[k] + 1]) / 2.0
    return best_feature, float(best_threshold), best_gain
