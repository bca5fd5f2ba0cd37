"""Class-weighted linear SVM and the weight-grid search for Task 1."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from ..metrics import Confusion, UndefinedMetricError, f_beta, precision, recall


class DegenerateDataError(ValueError):
    pass


class ConfigurationError(ValueError):
    pass


@dataclass
class SvmConfig:
    lam: float = 1e-3
    epochs: int = 400
    average_from: float = 0.5


@dataclass
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X):
        X = np.asarray(X, dtype=np.float64)
        return cls(X.mean(axis=0), X.std(axis=0))

    def apply(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != len(self.mean):
            raise ValueError(f"expected {len(self.mean)} features, got {X.shape[-1]}")
        safe = np.where(self.std > 0, self.std, 1.0)
        return np.where(self.std > 0, (X - self.mean) / safe, 0.0)

    def to_dict(self):
        return {"mean": [float(v) for v in self.mean], "std": [float(v) for v in self.std]}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["mean"], dtype=np.float64), np.array(d["std"], dtype=np.float64))


@dataclass
class LinearClassifier:
    """Linear decision rule on standardized features; score >= 0 means positive."""

    norm: Standardizer
    coef: np.ndarray
    bias: float
    weight: float = 1.0
    kind: str = "weighted-linear-svm"
    meta: dict = field(default_factory=dict)

    def decision_function(self, X):
        Z = self.norm.apply(np.atleast_2d(X))
        return Z @ self.coef + self.bias

    def predict(self, X):
        return np.where(self.decision_function(X) >= 0, 1, -1)

    def params(self):
        return {"coef": [float(v) for v in self.coef], "bias": float(self.bias),
                "weight": float(self.weight), "normalization": self.norm.to_dict()}

    @classmethod
    def from_params(cls, p, meta=None):
        return cls(Standardizer.from_dict(p["normalization"]), np.array(p["coef"], dtype=np.float64),
                   float(p["bias"]), float(p["weight"]), meta=dict(meta or {}))


def train_weighted_svm(X, y, w: float = 1.0, config: SvmConfig | None = None) -> LinearClassifier:
    """Minimize lam/2 |theta|^2 + mean(c_i * hinge_i), with c_i = w on positives.

    Full-batch subgradient descent with step 1/(lam t) and iterate averaging over
    the final part of the run. The bias is an extra regularized coordinate.
    No randomness is involved, so results depend only on the data.
    """
    cfg = config or SvmConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    labels = set(np.unique(y).tolist())
    if not labels <= {-1, 1}:
        raise ValueError("labels must be +1 / -1")
    if len(labels) < 2:
        raise DegenerateDataError("training set contains a single class")
    norm = Standardizer.fit(X)
    Z = np.hstack([norm.apply(X), np.ones((len(X), 1))])
    yf = y.astype(np.float64)
    cost = np.where(y > 0, float(w), 1.0) * yf / len(y)
    theta = np.zeros(Z.shape[1])
    avg = np.zeros_like(theta)
    start = int(cfg.epochs * cfg.average_from)
    for t in range(1, cfg.epochs + 1):
        active = (Z @ theta) * yf < 1.0
        grad = cfg.lam * theta - (cost * active) @ Z
        theta = theta - grad / (cfg.lam * t)
        if t > start:
            avg += theta
    avg /= cfg.epochs - start
    return LinearClassifier(norm, avg[:-1].copy(), float(avg[-1]), float(w))


def weight_grid(y_train) -> list[int]:
    y = np.asarray(y_train)
    pos = int(np.sum(y > 0))
    neg = int(np.sum(y <= 0))
    if pos == 0:
        raise DegenerateDataError("training set has no positives")
    pnr = max(1, math.ceil(neg / pos))
    return list(range(1, 2 * pnr + 1))


@dataclass
class SweepPoint:
    w: float
    model: LinearClassifier
    confusion: Confusion


def sweep_weights(X_tns, y_tns, X_tts, y_tts, grid=None, config: SvmConfig | None = None):
    """Train one classifier per grid weight and score it on the held-out set."""
    grid = weight_grid(y_tns) if grid is None else list(grid)
    if not grid:
        raise ConfigurationError("empty weight grid")
    if not np.any(np.asarray(y_tts) > 0):
        raise UndefinedMetricError("training-test set has no positives; F is undefined")
    out = []
    for w in grid:
        model = train_weighted_svm(X_tns, y_tns, w, config)
        out.append(SweepPoint(w, model, Confusion.from_labels(model.predict(X_tts), y_tts)))
    return out


@dataclass
class Selection:
    model: LinearClassifier
    w: float
    f: float | None
    beta: float
    trace: list


def select_weight(sweep: list[SweepPoint], beta: float = 1.0) -> Selection:
    """Keep the first grid point whose F-beta strictly improves on the best so far.

    Undefined F-beta counts as 0 for the comparison; if nothing beats 0 the
    first grid point is returned.
    """
    if not sweep:
        raise ConfigurationError("empty weight grid")
    trace = []
    best_idx = 0
    best_f = 0.0
    for i, point in enumerate(sweep):
        f = f_beta(point.confusion, beta)
        trace.append({"w": point.w, "f": f, "precision": precision(point.confusion),
                      "recall": recall(point.confusion)})
        score = 0.0 if f is None else f
        if score > best_f:
            best_idx, best_f = i, score
    best = sweep[best_idx]
    best_raw = trace[best_idx]["f"]
    model = LinearClassifier(best.model.norm, best.model.coef, best.model.bias, best.w,
                             meta={"beta": beta, "w": best.w, "f_tts": best_raw, "trace": trace})
    return Selection(model, best.w, best_raw, beta, trace)


def optimize_classifier(X_tns, y_tns, X_tts, y_tts, beta: float = 1.0, grid=None,
                        config: SvmConfig | None = None) -> Selection:
    return select_weight(sweep_weights(X_tns, y_tns, X_tts, y_tts, grid, config), beta)


def stratified_split(idents, labels, fraction: float = 0.75, seed: int = 0):
    """Deterministic stratified split into (train, held-out) index lists.

    Rows are ranked within each class by a hash of their identity and the
    seed, and the first ``fraction`` of each class goes to training.
    """
    if not 0 < fraction < 1:
        raise ConfigurationError("train fraction must lie in (0, 1)")
    labels = np.asarray(labels)
    train, test = [], []
    for cls in sorted(set(labels.tolist())):
        members = [i for i in range(len(labels)) if labels[i] == cls]
        members.sort(key=lambda i: hashlib.sha256(f"{seed}|{idents[i]}".encode()).hexdigest())
        cut = int(round(fraction * len(members)))
        if len(members) >= 2:
            cut = min(max(cut, 1), len(members) - 1)
        train += members[:cut]
        test += members[cut:]
    return sorted(train), sorted(test)
