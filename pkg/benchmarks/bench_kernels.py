"""Time the compiled and pure-Python kernel backends on the same inputs.

    python benchmarks/bench_kernels.py [--repeat N]

Prints one line per kernel with the best-of-N time of each backend and the
speed-up. Both backends are checked to agree before anything is timed.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from burstwatch.kernels import available_backends, new_state


def _lifecycle_input(rng, n=200_000):
    counts = np.zeros(n, dtype=np.int64)
    t = 0
    while t < n:
        seg = int(rng.integers(1, 400))
        rate = rng.choice([0.0, 0.3, 12.0, 150.0], p=[0.5, 0.2, 0.2, 0.1])
        counts[t:t + seg] = rng.poisson(rate, size=min(seg, n - t))
        t += seg
    return counts


def _run_lifecycle(mod, counts):
    st = new_state(5, 0)
    return mod.lifecycle_advance(st, counts, 50, 5, 1440, 1440, 1440)


def _run_derivative(mod, series_list):
    return [mod.derivative_features(s) for s in series_list]


def _run_split(mod, data):
    X, y, order = data
    return mod.best_split(X, y, order, 5)


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the Python backend is available")
    rng = np.random.default_rng(0)
    counts = _lifecycle_input(rng)
    series = [rng.integers(0, 300, size=361).astype(np.float64) for _ in range(2000)]
    X = rng.normal(size=(400, 58))
    y = X[:, 0] + rng.normal(size=400)
    order = np.argsort(X, axis=0, kind="stable").astype(np.int64)
    cases = [
        ("lifecycle_advance (200k minutes)", lambda m: _run_lifecycle(m, counts)),
        ("derivative_features (2000 x 361)", lambda m: _run_derivative(m, series)),
        ("best_split (400 x 58)", lambda m: _run_split(m, (X, y, order))),
    ]
    for name, case in cases:
        times = {}
        results = {}
        for backend, mod in backends.items():
            times[backend], results[backend] = _best(lambda: case(mod), args.repeat)
        if len(results) == 2:
            a, b = results["python"], results["cython"]
            if name.startswith("derivative"):
                same = np.allclose(np.array(a), np.array(b), rtol=1e-12, atol=1e-9)
            elif name.startswith("best_split"):
                same = a[:2] == b[:2] and abs(a[2] - b[2]) <= 1e-9 * max(1.0, abs(a[2]))
            else:
                same = list(map(tuple, a)) == list(map(tuple, b))
            if not same:
                raise SystemExit(f"{name}: backends disagree")
        line = f"{name:36s} python {times['python'] * 1e3:9.2f} ms"
        if "cython" in times:
            line += f"  cython {times['cython'] * 1e3:8.2f} ms  x{times['python'] / times['cython']:.1f}"
        print(line)


if __name__ == "__main__":
    main()
