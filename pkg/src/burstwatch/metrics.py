"""Classification and regression metrics with explicit undefined values.

An undefined metric is returned as ``None``; callers decide how to treat it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class UndefinedMetricError(ValueError):
    pass


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    fn: int
    tn: int

    @classmethod
    def from_labels(cls, predicted, truth) -> "Confusion":
        p = np.asarray(predicted) > 0
        t = np.asarray(truth) > 0
        if p.shape != t.shape:
            raise ValueError("predicted and truth differ in length")
        return cls(int(np.sum(p & t)), int(np.sum(p & ~t)), int(np.sum(~p & t)), int(np.sum(~p & ~t)))


def precision(c: Confusion) -> float | None:
    d = c.tp + c.fp
    return c.tp / d if d else None


def recall(c: Confusion) -> float | None:
    d = c.tp + c.fn
    return c.tp / d if d else None


def f_beta_from(p: float | None, r: float | None, beta: float) -> float | None:
    if p is None or r is None:
        return None
    b2 = beta * beta
    denom = b2 * p + r
    if denom == 0:
        return None
    return (1 + b2) * p * r / denom


def f_beta(c: Confusion, beta: float) -> float | None:
    """F-beta from counts, rounded once from the exact rational value.

    Undefined (``None``) when precision or recall is undefined; 0 when both
    are defined and there are no true positives.
    """
    if c.tp + c.fp == 0 or c.tp + c.fn == 0:
        return None
    b2 = Fraction(beta) ** 2
    num = (1 + b2) * c.tp
    return float(num / (num + b2 * c.fn + c.fp))


def precision_recall_f(predicted, truth, beta: float = 1.0):
    """(precision, recall, F-beta); each is ``None`` when its denominator is zero."""
    c = Confusion.from_labels(predicted, truth)
    return precision(c), recall(c), f_beta(c, beta)


def rmse(predicted, truth) -> float | None:
    a = np.asarray(predicted, dtype=np.float64)
    b = np.asarray(truth, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("predicted and truth differ in length")
    if a.size == 0:
        return None
    return math.sqrt(float(np.mean((a - b) ** 2)))


def all_positive_f1(positive_rate: float) -> float | None:
    """F1 of predicting every instance positive."""
    if positive_rate <= 0:
        return None
    return 2 * positive_rate / (1 + positive_rate)


def prior_random_f1(positive_rate: float) -> float | None:
    """Expected F1 of labeling positive at random with the class prior."""
    if positive_rate <= 0:
        return None
    return positive_rate
