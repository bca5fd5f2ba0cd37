"""Run configuration shared by the pipeline commands."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

from .features.series import SaxConfig
from .lifecycle import LifecycleParams
from .models.regression import RegressionConfig
from .models.svm import SvmConfig


class ConfigError(ValueError):
    pass


REGRESSOR_KINDS = ("linear-regression", "cart")


@dataclass
class RunConfig:
    delta: int = 50
    window_minutes: int = 5
    stages: tuple = (5, 15, 30, 60, 180, 360)
    emoticon_lexicon: str | None = None
    sentiment_lexicon: str | None = None
    train_fraction: float = 0.75
    regressors: tuple = REGRESSOR_KINDS
    betas: tuple = (1.0, 0.5, 2.0)
    seed: int = 0
    svm_lam: float = 1e-3
    svm_epochs: int = 400
    ridge: float | None = 1.0
    cart_max_depth: int = 3
    cart_min_leaf: int = 10
    sax_alphabet: int = 6
    sax_segments: int = 8
    thresholds: list = field(default_factory=list)

    def validate(self) -> "RunConfig":
        if self.delta <= 0:
            raise ConfigError("delta must be positive")
        if self.window_minutes < 1:
            raise ConfigError("window minutes must be >= 1")
        if not self.stages or any(int(s) < 0 for s in self.stages):
            raise ConfigError("stages must be a non-empty list of non-negative minutes")
        if len(set(self.stages)) != len(self.stages):
            raise ConfigError("stages must be distinct")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train fraction must lie in (0, 1)")
        for kind in self.regressors:
            if kind not in REGRESSOR_KINDS:
                raise ConfigError(f"unknown regressor {kind!r}; choose from {REGRESSOR_KINDS}")
        if not self.betas or any(b <= 0 for b in self.betas):
            raise ConfigError("betas must be positive")
        if self.svm_lam <= 0 or self.svm_epochs < 1:
            raise ConfigError("svm_lam must be positive and svm_epochs >= 1")
        if self.ridge is not None and self.ridge < 0:
            raise ConfigError("ridge must be non-negative")
        SaxConfig(self.sax_alphabet, self.sax_segments)
        return self

    @property
    def lifecycle(self) -> LifecycleParams:
        return LifecycleParams(delta=self.delta, window_minutes=self.window_minutes)

    @property
    def sax(self) -> SaxConfig:
        return SaxConfig(self.sax_alphabet, self.sax_segments)

    @property
    def svm(self) -> SvmConfig:
        return SvmConfig(lam=self.svm_lam, epochs=self.svm_epochs)

    @property
    def regression(self) -> RegressionConfig:
        return RegressionConfig(self.ridge, self.cart_max_depth, self.cart_min_leaf)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        kw = {k: tuple(v) if isinstance(v, list) and k != "thresholds" else v for k, v in d.items()}
        return cls(**kw).validate()

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))
