"""Independent reference implementations used only by the tests.

Nothing here imports the package's algorithms; each oracle is written from
the definitions in the most direct (and slow) way available.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

RANK = {"Triggered": 0, "BurstOnset": 1, "LabeledNegative": 1, "OffBurst": 2, "Death": 3}


# ---- lifecycle -----------------------------------------------------------------

def window_sums(counts, window):
    out = []
    for t in range(len(counts)):
        out.append(sum(counts[max(0, t - window + 1):t + 1]))
    return out


def lifecycle_oracle(counts, delta, window=5, horizon=1440, off_quiet=1440, death_quiet=1440):
    """Offline evaluation of trigger, burst, negative, off-burst and death.

    Returns (events, cycles). Events are (emitted, kind, at, cycle) sorted in
    emission order; only events confirmable within the series are listed.
    Minutes are indices into ``counts``.
    """
    c = [int(v) for v in counts]
    n = len(c)
    W = window_sums(c, window)
    end = n - 1
    events = []
    cycles = []
    t0 = 0
    cycle = 0
    while True:
        s = next((t for t in range(t0, n) if W[t] > delta), None)
        if s is None:
            break
        first_seen = next(t for t in range(t0, s + 1) if c[t] > 0)
        c1 = c[s]
        thr = max(c1 + delta, (3 * c1 + 1) // 2)
        rec = {"cycle": cycle, "first_seen": first_seen, "trigger": s, "c1": c1, "threshold": thr,
               "burst": None, "negative": None, "offburst": None, "death": None}
        cycles.append(rec)
        events.append((s, "Triggered", s, cycle))
        b = next((t for t in range(s + 1, min(s + horizon, end) + 1) if c[t] > thr), None)
        if b is not None:
            rec["burst"] = b
            events.append((b, "BurstOnset", b, cycle))
            for t in range(b + 1, n):
                if t + off_quiet - 1 > end:
                    break
                if all(c[u] < thr for u in range(t, t + off_quiet)):
                    rec["offburst"] = t
                    events.append((t + off_quiet - 1, "OffBurst", t, cycle))
                    break
        elif s + horizon <= end:
            rec["negative"] = s + horizon
            events.append((s + horizon, "LabeledNegative", s + horizon, cycle))
        L = None
        for t in range(s, n):
            if t + death_quiet > end:
                break
            if W[t] > delta and all(W[u] <= delta for u in range(t + 1, t + death_quiet + 1)):
                L = t
                break
        if L is None:
            break
        rec["death"] = L + 1
        events.append((L + death_quiet, "Death", L + 1, cycle))
        t0 = L + death_quiet + 1
        cycle += 1
    events.sort(key=lambda e: (e[0], RANK[e[1]]))
    return events, cycles


# ---- features ------------------------------------------------------------------

def derivative_oracle(series):
    """The eleven series features, recomputed with statistics-module style sums."""
    c = [float(v) for v in series]
    n = len(c)
    mean = math.fsum(c) / n
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in c) / n)
    hi, lo = max(c), min(c)
    out = [mean, std, c[-1] - c[0], c[-1] - hi, c[-1] - lo, float(c.index(hi))]
    if n < 2:
        return out + [0.0] * 5
    d = [c[i + 1] - c[i] for i in range(n - 1)]
    a = [abs(v) for v in d]
    m = math.fsum(a) / len(a)
    s = math.sqrt(math.fsum((v - m) ** 2 for v in a) / len(a))
    balance = sum(1 for v in d if v >= 0) - sum(1 for v in d if v < 0)
    return out + [m, s, d[-1], max(d), float(balance)]


def polyfit_oracle(series, degree):
    """Exact least-squares polynomial on u = i / (n - 1) via rational normal equations."""
    n = len(series)
    if n == 1:
        return [Fraction(int(series[0]))] + [Fraction(0)] * degree
    u = [Fraction(i, n - 1) for i in range(n)]
    y = [Fraction(int(v)) for v in series]
    k = degree + 1
    A = [[sum(ui ** (a + b) for ui in u) for b in range(k)] for a in range(k)]
    rhs = [sum(ui ** a * yi for ui, yi in zip(u, y)) for a in range(k)]
    # Gauss-Jordan elimination in exact arithmetic
    M = [row[:] + [r] for row, r in zip(A, rhs)]
    for col in range(k):
        piv = next(r for r in range(col, k) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [v / pv for v in M[col]]
        for r in range(k):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [M[i][k] for i in range(k)]


def graph_oracle(vertices, edges):
    """Order, density, average degree and degree-distribution entropy of a directed graph."""
    V = set(vertices)
    E = set()
    for a, b in edges:
        V.update((a, b))
        if a != b:
            E.add((a, b))
    v = len(V)
    if v <= 1:
        return [float(v), 0.0, 0.0, 0.0]
    deg = {x: 0 for x in V}
    for a, b in E:
        deg[a] += 1
        deg[b] += 1
    ent = 0.0
    for k in set(deg.values()):
        p = sum(1 for x in V if deg[x] == k) / v
        ent -= p * math.log(p)
    return [float(v), len(E) / (v * (v - 1)), 2 * len(E) / v, ent]


def similarity_oracle(a, b):
    return 1.0 / (1.0 + math.sqrt(math.fsum((x - y) ** 2 for x, y in zip(a, b))))


def prototype_oracle(query, pool, task, k=10):
    """Exhaustive ranking: sort all (similarity, key, cycle) then aggregate the top k."""
    scored = [(similarity_oracle(query, vec), key, cyc, val) for key, cyc, vec, val in pool]
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    top = scored[:k]
    out = []
    if not top:
        return [0.0] * k
    for i in range(1, len(top) + 1):
        head = top[:i]
        if task == "burst":
            out.append(float(sum(1 for t in head if t[3] == 1)))
        else:
            num = math.fsum(t[0] * t[3] for t in head)
            den = math.fsum(t[0] for t in head)
            out.append(num / den if den > 0 else 0.0)
    while len(out) < k:
        out.append(out[-1])
    return out


def three_grams_oracle(word):
    """Every ordered pick of two earlier symbols followed by the final symbol."""
    if len(word) < 3:
        return set()
    return {"".join(c) + word[-1] for c in itertools.combinations(word[:-1], 2)}


def paa_oracle(series, segments):
    """Piecewise aggregate approximation with fractional segment weights."""
    n = len(series)
    if n <= segments:
        return [float(v) for v in series]
    out = []
    for j in range(segments):
        lo = Fraction(j * n, segments)
        hi = Fraction((j + 1) * n, segments)
        acc = Fraction(0)
        for i in range(n):
            overlap = min(hi, i + 1) - max(lo, i)
            if overlap > 0:
                acc += overlap * Fraction(float(series[i]))
        out.append(float(acc / (hi - lo)))
    return out


# ---- metrics -------------------------------------------------------------------

def confusion_oracle(pred, truth):
    tp = sum(1 for p, t in zip(pred, truth) if p > 0 and t > 0)
    fp = sum(1 for p, t in zip(pred, truth) if p > 0 and t <= 0)
    fn = sum(1 for p, t in zip(pred, truth) if p <= 0 and t > 0)
    tn = sum(1 for p, t in zip(pred, truth) if p <= 0 and t <= 0)
    return tp, fp, fn, tn


def fbeta_oracle(tp, fp, fn, beta):
    if tp + fp == 0 or tp + fn == 0:
        return None
    p = Fraction(tp, tp + fp)
    r = Fraction(tp, tp + fn)
    if p + r == 0:
        return 0.0
    b2 = Fraction(beta) ** 2
    return float((1 + b2) * p * r / (b2 * p + r))


def random_lifecycle_series(rng, n, delta, window):
    """Regime-switching counts that visit every lifecycle phase."""
    out = np.zeros(n, dtype=np.int64)
    t = 0
    while t < n:
        seg = int(rng.integers(1, 60))
        regime = rng.choice(4, p=[0.45, 0.2, 0.2, 0.15])
        rate = (0.0, 0.3, delta / window, 2.5 * delta)[regime]
        out[t:t + seg] = rng.poisson(rate, size=min(seg, n - t))
        t += seg
    return out
