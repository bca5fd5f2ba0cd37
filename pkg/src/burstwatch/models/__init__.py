"""Task 1 classifier, Task 2/3 regressors and their serialized form."""

from __future__ import annotations

import json

import numpy as np

from ..features.schema import ALPHA, FEATURE_NAMES, SCHEMA_VERSION
from .regression import (LinearRegressor, RegressionConfig, RegressionTree, SingularSystemError,
                         log_target, to_minutes, train_regressor)
from .svm import (ConfigurationError, DegenerateDataError, LinearClassifier, Selection, SvmConfig,
                  optimize_classifier, select_weight, stratified_split, sweep_weights,
                  train_weighted_svm, weight_grid)

MODEL_FORMAT_VERSION = 1

_KINDS = {
    "weighted-linear-svm": LinearClassifier,
    "linear-regression": LinearRegressor,
    "cart": RegressionTree,
}


class SchemaMismatchError(ValueError):
    pass


def _check_schema(model, X):
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    expected = model.meta.get("alpha", ALPHA)
    if X.shape[1] != expected:
        raise SchemaMismatchError(f"model expects {expected} features, got {X.shape[1]}")
    return X


def predict_label(model: LinearClassifier, X):
    """Labels (+1/-1) and raw scores; a score of exactly 0 is positive."""
    X = _check_schema(model, X)
    scores = model.decision_function(X)
    return np.where(scores >= 0, 1, -1), scores


def predict_time(model, X):
    """Log-minute predictions of a regressor."""
    return model.predict(_check_schema(model, X))


def model_to_dict(model) -> dict:
    meta = dict(model.meta)
    meta.setdefault("alpha", ALPHA)
    meta.setdefault("schema_version", SCHEMA_VERSION)
    return {"format_version": MODEL_FORMAT_VERSION, "kind": model.kind,
            "feature_names": list(FEATURE_NAMES[:meta["alpha"]]) if meta["alpha"] == ALPHA else None,
            "meta": meta, "params": model.params()}


def model_from_dict(d: dict):
    cls = _KINDS.get(d.get("kind"))
    if cls is None:
        raise ValueError(f"unknown model kind {d.get('kind')!r}")
    return cls.from_params(d["params"], d.get("meta"))


def dumps_model(model) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True, indent=1)


def loads_model(text: str):
    return model_from_dict(json.loads(text))


__all__ = [
    "ConfigurationError", "DegenerateDataError", "LinearClassifier", "LinearRegressor",
    "RegressionConfig", "RegressionTree", "SchemaMismatchError", "Selection",
    "SingularSystemError", "SvmConfig", "dumps_model", "loads_model", "log_target",
    "model_from_dict", "model_to_dict", "optimize_classifier", "predict_label", "predict_time",
    "select_weight", "stratified_split", "sweep_weights", "to_minutes", "train_regressor",
    "train_weighted_svm", "weight_grid",
]
