"""Similarity to historic hashtags and the prototype feature family."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .schema import BASE_DIM

TASKS = ("burst", "tbb", "tra")
TOP_K = 10


class SchemaMismatchError(ValueError):
    pass


@dataclass
class NormalizationStats:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, rows) -> "NormalizationStats":
        X = np.asarray(rows, dtype=np.float64).reshape(-1, BASE_DIM)
        if len(X) == 0:
            return cls(np.zeros(BASE_DIM), np.zeros(BASE_DIM))
        return cls(X.mean(axis=0), X.std(axis=0))

    def apply(self, rows) -> np.ndarray:
        X = np.asarray(rows, dtype=np.float64)
        if X.shape[-1] != len(self.mean):
            raise SchemaMismatchError(f"expected {len(self.mean)} base features, got {X.shape[-1]}")
        safe = np.where(self.std > 0, self.std, 1.0)
        return np.where(self.std > 0, (X - self.mean) / safe, 0.0)

    def to_dict(self):
        return {"mean": [float(v) for v in self.mean], "std": [float(v) for v in self.std]}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["mean"], dtype=np.float64), np.array(d["std"], dtype=np.float64))


def similarity(a, b) -> float:
    """1 / (1 + Euclidean distance) between two normalized representations."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise SchemaMismatchError(f"vector shapes differ: {a.shape} vs {b.shape}")
    return 1.0 / (1.0 + float(np.sqrt(np.sum((a - b) ** 2))))


@dataclass
class PrototypePool:
    """Historic rows usable as prototypes for one task, sorted by (key, cycle)."""

    keys: list
    cycles: list
    raw: np.ndarray
    values: np.ndarray
    normalized: np.ndarray | None = None

    @classmethod
    def build(cls, rows) -> "PrototypePool":
        rows = sorted(rows, key=lambda r: (r[0], r[1]))
        keys = [r[0] for r in rows]
        cycles = [int(r[1]) for r in rows]
        raw = np.array([r[2] for r in rows], dtype=np.float64).reshape(-1, BASE_DIM)
        values = np.array([r[3] for r in rows], dtype=np.float64)
        return cls(keys, cycles, raw, values)

    def __len__(self):
        return len(self.keys)


@dataclass
class PrototypeIndex:
    """Per-stage historic index: normalization statistics plus one pool per task."""

    stats: NormalizationStats
    pools: dict = field(default_factory=dict)

    def __post_init__(self):
        for pool in self.pools.values():
            pool.normalized = self.stats.apply(pool.raw) if len(pool) else pool.raw

    def features(self, raw_base, task: str) -> list[float]:
        return prototype_features(self.stats.apply(raw_base), self.pools[task], task)

    def to_dict(self):
        return {
            "stats": self.stats.to_dict(),
            "pools": {t: {"keys": p.keys, "cycles": p.cycles,
                          "raw": [[float(v) for v in row] for row in p.raw],
                          "values": [float(v) for v in p.values]}
                      for t, p in sorted(self.pools.items())},
        }

    @classmethod
    def from_dict(cls, d):
        pools = {}
        for t, p in d["pools"].items():
            raw = np.array(p["raw"], dtype=np.float64).reshape(-1, BASE_DIM)
            pools[t] = PrototypePool(list(p["keys"]), list(p["cycles"]), raw,
                                     np.array(p["values"], dtype=np.float64))
        return cls(NormalizationStats.from_dict(d["stats"]), pools)


def prototype_features(query_normalized, pool: PrototypePool, task: str) -> list[float]:
    """Top-k prototype features for k = 1..10.

    For ``task == "burst"`` the value for k is the number of bursting
    hashtags among the k most similar historic rows. Otherwise it is the
    similarity-weighted mean of the pool's target values over the top k.
    Ties in similarity keep the (key, cycle) order of the pool.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    n = len(pool)
    if n == 0:
        return [0.0] * TOP_K
    q = np.asarray(query_normalized, dtype=np.float64)
    if q.shape != (pool.normalized.shape[1],):
        raise SchemaMismatchError(f"query has shape {q.shape}")
    dist = np.sqrt(np.sum((pool.normalized - q) ** 2, axis=1))
    sims = 1.0 / (1.0 + dist)
    order = np.argsort(-sims, kind="stable")[:TOP_K]
    top_sims = sims[order]
    top_vals = pool.values[order]
    out = []
    acc_num = 0.0
    acc_den = 0.0
    for k in range(len(order)):
        if task == "burst":
            acc_num += top_vals[k]
            out.append(float(acc_num))
        else:
            acc_num += top_sims[k] * top_vals[k]
            acc_den += top_sims[k]
            out.append(float(acc_num / acc_den))
    while len(out) < TOP_K:
        out.append(out[-1])
    return out
