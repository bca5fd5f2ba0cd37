# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Mirrors ``_pykernels`` operation for operation."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY

cnp.import_array()

ctypedef cnp.int64_t i64

cdef enum:
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

cdef enum:
    DORMANT = 0
    TRIGGERED = 1
    BURSTING = 2
    OFFBURST_PHASE = 3

cdef enum:
    EV_TRIGGERED = 1
    EV_BURST = 2
    EV_NEGATIVE = 3
    EV_OFFBURST = 4
    EV_DEATH = 5


cdef inline i64 _imax(i64 a, i64 b) nogil:
    return a if a > b else b


cdef inline i64 _imin(i64 a, i64 b) nogil:
    return a if a < b else b


cdef inline void _reset_cycle(i64[::1] st) nogil:
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


cdef void _step(i64[::1] st, i64 minute, i64 count, i64 delta, i64 window,
                i64 horizon, i64 off_quiet, i64 death_quiet, list events):
    cdef i64 slot = RING + minute % window
    cdef i64 wsum, phase
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
            st[THRESHOLD] = _imax(count + delta, (3 * count + 1) // 2)
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


def lifecycle_advance(i64[::1] state, counts, i64 delta, i64 window,
                      i64 horizon, i64 off_quiet, i64 death_quiet):
    cdef i64[::1] c = np.ascontiguousarray(counts, dtype=np.int64)
    cdef Py_ssize_t i, n = c.shape[0]
    cdef i64 minute = state[NEXT_MINUTE]
    cdef list events = []
    for i in range(n):
        _step(state, minute, c[i], delta, window, horizon, off_quiet, death_quiet, events)
        minute += 1
    return events


def lifecycle_skip_zeros(i64[::1] state, i64 n, i64 delta, i64 window,
                         i64 horizon, i64 off_quiet, i64 death_quiet):
    cdef list events = []
    cdef i64 end = state[NEXT_MINUTE] + n
    cdef i64 minute, phase, target
    while state[NEXT_MINUTE] < end:
        minute = state[NEXT_MINUTE]
        if state[WINDOW_SUM] != 0:
            _step(state, minute, 0, delta, window, horizon, off_quiet, death_quiet, events)
            continue
        phase = state[PHASE]
        target = end
        if phase != DORMANT:
            target = _imin(target, state[LAST_ACTIVE] + death_quiet)
            if phase == TRIGGERED and state[NEGATIVE] == 0:
                target = _imin(target, state[TRIGGER] + horizon)
            elif phase == BURSTING:
                if state[RUN_START] < 0:
                    state[RUN_START] = minute
                target = _imin(target, state[RUN_START] + off_quiet - 1)
        if target > minute:
            state[NEXT_MINUTE] = target
        if state[NEXT_MINUTE] < end:
            _step(state, state[NEXT_MINUTE], 0, delta, window, horizon, off_quiet,
                  death_quiet, events)
    return events


def derivative_features(series):
    cdef double[::1] c = np.ascontiguousarray(series, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0], j, m
    cdef double total = 0.0, mean, ss = 0.0, std, hi, lo, last, d, a
    cdef double abs_total = 0.0, max_fod, mean_fod
    cdef Py_ssize_t idx_max = 0
    cdef i64 balance = 0
    for j in range(n):
        total += c[j]
    mean = total / n
    for j in range(n):
        ss += (c[j] - mean) * (c[j] - mean)
    std = sqrt(ss / n)
    hi = c[0]
    lo = c[0]
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
    max_fod = c[1] - c[0]
    for j in range(m):
        d = c[j + 1] - c[j]
        abs_total += fabs(d)
        if d > max_fod:
            max_fod = d
        if d >= 0:
            balance += 1
        else:
            balance -= 1
    mean_fod = abs_total / m
    ss = 0.0
    for j in range(m):
        a = fabs(c[j + 1] - c[j]) - mean_fod
        ss += a * a
    out[6] = mean_fod
    out[7] = sqrt(ss / m)
    out[8] = last - c[n - 2]
    out[9] = max_fod
    out[10] = float(balance)
    return out


def best_split(X, y, order, i64 min_leaf):
    cdef double[:, ::1] xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef i64[:, ::1] ov = np.ascontiguousarray(order, dtype=np.int64)
    cdef Py_ssize_t n = xv.shape[0], p = xv.shape[1], i, j, k
    cdef double[::1] cs = np.empty(n, dtype=np.float64)
    cdef double[::1] cq = np.empty(n, dtype=np.float64)
    cdef double[::1] xs = np.empty(n, dtype=np.float64)
    cdef double acc_s, acc_q, yi, s_all, q_all, sse_all, nl, nr, sl, ql, sr, qr, gain
    cdef double feat_gain, feat_thr
    cdef Py_ssize_t best_feature = -1, feat_k
    cdef double best_threshold = 0.0, best_gain = 0.0
    if n < 2 * min_leaf:
        return best_feature, best_threshold, best_gain
    for j in range(p):
        if n - min_leaf - 1 < min_leaf - 1:
            continue
        acc_s = 0.0
        acc_q = 0.0
        for i in range(n):
            k = ov[i, j]
            xs[i] = xv[k, j]
            yi = yv[k]
            acc_s = acc_s + yi
            acc_q = acc_q + yi * yi
            cs[i] = acc_s
            cq[i] = acc_q
        s_all = cs[n - 1]
        q_all = cq[n - 1]
        sse_all = q_all - s_all * s_all / n
        feat_gain = -INFINITY
        feat_k = -1
        for i in range(min_leaf - 1, n - min_leaf):
            if not (xs[i] < xs[i + 1]):
                continue
            nl = <double>(i + 1)
            nr = n - nl
            sl = cs[i]
            ql = cq[i]
            sr = s_all - sl
            qr = q_all - ql
            gain = sse_all - (ql - sl * sl / nl) - (qr - sr * sr / nr)
            if gain > feat_gain:
                feat_gain = gain
                feat_k = i
        if feat_k < 0:
            continue
        if feat_gain > best_gain:
            best_gain = feat_gain
            best_feature = j
            best_threshold = (xs[feat_k] + xs[feat_k + 1]) / 2.0
    return best_feature, best_threshold, best_gain
