"""Regressors for log-scale time targets: least squares and a CART tree."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels


class SingularSystemError(np.linalg.LinAlgError):
    pass


def log_target(minutes) -> np.ndarray:
    """Natural log of minutes clamped to at least one."""
    return np.log(np.maximum(np.asarray(minutes, dtype=np.float64), 1.0))


def to_minutes(log_minutes):
    return np.exp(log_minutes)


@dataclass
class LinearRegressor:
    """y = X @ coef + intercept, fitted on standardized columns.

    Zero-variance columns are dropped before fitting and get a zero
    coefficient. When the standardized Gram matrix is rank deficient or badly
    conditioned a ridge penalty is used instead, if one is configured.
    """

    coef: np.ndarray
    intercept: float
    ridge_used: float = 0.0
    kind: str = "linear-regression"
    meta: dict = field(default_factory=dict)

    COND_LIMIT = 1e12

    @classmethod
    def fit(cls, X, y, ridge: float | None = 1e-3) -> "LinearRegressor":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n, p = X.shape
        if n == 0:
            raise ValueError("no training instances")
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        keep = np.flatnonzero(std > 0)
        y_mean = float(y.mean())
        coef = np.zeros(p)
        used = 0.0
        if len(keep):
            Z = (X[:, keep] - mean[keep]) / std[keep]
            yc = y - y_mean
            gram = Z.T @ Z
            singular = n <= len(keep) or np.linalg.cond(gram) > cls.COND_LIMIT
            if singular:
                if ridge is None:
                    raise SingularSystemError(
                        f"normal system is singular ({n} instances, {len(keep)} usable features)"
                        " and no ridge penalty is configured")
                used = float(ridge) * n
                b = np.linalg.solve(gram + used * np.eye(len(keep)), Z.T @ yc)
            else:
                b, *_ = np.linalg.lstsq(Z, yc, rcond=None)
            coef[keep] = b / std[keep]
        intercept = y_mean - float(coef @ mean)
        return cls(coef, intercept, used)

    def predict(self, X):
        return np.atleast_2d(np.asarray(X, dtype=np.float64)) @ self.coef + self.intercept

    def params(self):
        return {"coef": [float(v) for v in self.coef], "intercept": float(self.intercept),
                "ridge_used": float(self.ridge_used)}

    @classmethod
    def from_params(cls, p, meta=None):
        return cls(np.array(p["coef"], dtype=np.float64), float(p["intercept"]),
                   float(p["ridge_used"]), meta=dict(meta or {}))


@dataclass
class RegressionTree:
    """Binary regression tree with variance-reduction splits.

    Nodes are stored flat: ``feature[i] == -1`` marks a leaf holding
    ``value[i]``; otherwise rows with ``x[feature] <= threshold`` go left.
    """

    feature: list
    threshold: list
    left: list
    right: list
    value: list
    kind: str = "cart"
    meta: dict = field(default_factory=dict)

    @classmethod
    def fit(cls, X, y, max_depth: int = 5, min_leaf: int = 10) -> "RegressionTree":
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        if len(y) == 0:
            raise ValueError("no training instances")
        if max_depth < 0 or min_leaf < 1:
            raise ValueError("max_depth must be >= 0 and min_leaf >= 1")
        tree = cls([], [], [], [], [])
        tree._grow(X, y, np.arange(len(y)), 0, max_depth, min_leaf)
        return tree

    def _new_node(self):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def _grow(self, X, y, rows, depth, max_depth, min_leaf):
        node = self._new_node()
        ys = y[rows]
        self.value[node] = float(ys[0]) if np.ptp(ys) == 0 else float(ys.mean())
        if depth >= max_depth or len(rows) < 2 * min_leaf or np.ptp(ys) == 0:
            return node
        Xs = X[rows]
        order = np.argsort(Xs, axis=0, kind="stable").astype(np.int64)
        feat, thr, gain = kernels.best_split(Xs, ys, order, min_leaf)
        if feat < 0 or not gain > 0:
            return node
        go_left = Xs[:, feat] <= thr
        left_rows = rows[go_left]
        right_rows = rows[~go_left]
        if len(left_rows) == 0 or len(right_rows) == 0:
            return node
        self.feature[node] = int(feat)
        self.threshold[node] = float(thr)
        self.left[node] = self._grow(X, y, left_rows, depth + 1, max_depth, min_leaf)
        self.right[node] = self._grow(X, y, right_rows, depth + 1, max_depth, min_leaf)
        return node

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.empty(len(X))
        for i, x in enumerate(X):
            node = 0
            while self.feature[node] >= 0:
                node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
            out[i] = self.value[node]
        return out

    @property
    def depth(self) -> int:
        def walk(node):
            if self.feature[node] < 0:
                return 0
            return 1 + max(walk(self.left[node]), walk(self.right[node]))
        return walk(0)

    def params(self):
        return {"feature": list(self.feature), "threshold": [float(v) for v in self.threshold],
                "left": list(self.left), "right": list(self.right),
                "value": [float(v) for v in self.value]}

    @classmethod
    def from_params(cls, p, meta=None):
        return cls(list(p["feature"]), list(p["threshold"]), list(p["left"]), list(p["right"]),
                   list(p["value"]), meta=dict(meta or {}))


@dataclass
class RegressionConfig:
    ridge: float | None = 1e-3
    max_depth: int = 5
    min_leaf: int = 10


def train_regressor(X, log_y, kind: str, config: RegressionConfig | None = None):
    cfg = config or RegressionConfig()
    if kind == "linear-regression":
        return LinearRegressor.fit(X, log_y, cfg.ridge)
    if kind == "cart":
        # small late-stage sets would otherwise never split
        min_leaf = max(1, min(cfg.min_leaf, len(log_y) // 4))
        return RegressionTree.fit(X, log_y, cfg.max_depth, min_leaf)
    raise ValueError(f"unknown regressor kind {kind!r}")


def training_rmse(model, X, y) -> float:
    r = model.predict(X) - np.asarray(y, dtype=np.float64)
    return math.sqrt(float(np.mean(r * r)))
