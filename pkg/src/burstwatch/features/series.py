"""Shape features of the count series <c_s, ..., c_tp>: derivatives,
polynomial coefficients and symbolic 3-grams."""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from statistics import NormalDist
from typing import Iterable

import numpy as np

from .. import kernels

MAX_POLY_ORDER = 6


class ConfigurationError(ValueError):
    pass


def ts_derivative_features(series) -> list[float]:
    """The eleven derivative features of a non-empty count slice (see schema order)."""
    if len(series) == 0:
        raise ValueError("derivative features need at least one point")
    return kernels.derivative_features(np.asarray(series, dtype=np.float64))


@dataclass(frozen=True)
class PolyFit:
    beta: int
    coeffs: tuple

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        return sum(w * x ** k for k, w in enumerate(self.coeffs))


def polyfit(series) -> PolyFit:
    """Least-squares polynomial over x = 0..n-1 with order min(n - 1, 6).

    The system is solved in the scaled variable u = x / (n - 1) to keep the
    Vandermonde matrix well conditioned, then mapped back to powers of x.
    """
    y = np.asarray(series, dtype=np.float64)
    n = len(y)
    if n == 0:
        raise ValueError("polyfit needs at least one point")
    beta = min(n - 1, MAX_POLY_ORDER)
    scale = float(n - 1) if n > 1 else 1.0
    u = np.arange(n, dtype=np.float64) / scale
    vander = np.vander(u, beta + 1, increasing=True)
    c, *_ = np.linalg.lstsq(vander, y, rcond=None)
    coeffs = [0.0] * (MAX_POLY_ORDER + 1)
    for k in range(beta + 1):
        coeffs[k] = float(c[k] / scale ** k)
    return PolyFit(beta, tuple(coeffs))


@dataclass(frozen=True)
class SaxConfig:
    alphabet_size: int = 6
    paa_segments: int = 8

    def __post_init__(self):
        if not 2 <= self.alphabet_size <= 10:
            raise ConfigurationError("alphabet_size must lie in [2, 10]")
        if self.paa_segments < 3:
            raise ConfigurationError("paa_segments must be >= 3")


@lru_cache(maxsize=None)
def gaussian_breakpoints(alphabet_size: int) -> tuple:
    nd = NormalDist()
    return tuple(nd.inv_cdf(i / alphabet_size) for i in range(1, alphabet_size))


def paa(values, segments: int) -> np.ndarray:
    """Piecewise aggregate means; segment borders may split a point."""
    x = np.asarray(values, dtype=np.float64)
    n = len(x)
    if n <= segments:
        return x.copy()
    if n % segments == 0:
        return x.reshape(segments, n // segments).mean(axis=1)
    # each point repeated `segments` times gives n*segments slots, n per segment
    return np.repeat(x, segments).reshape(segments, n).mean(axis=1)


def sax_encode(series, cfg: SaxConfig = SaxConfig()) -> str:
    x = np.asarray(series, dtype=np.float64)
    if len(x) == 0:
        return ""
    letters = string.ascii_uppercase[:cfg.alphabet_size]
    seg = min(cfg.paa_segments, len(x))
    std = x.std()
    if std <= 1e-12:
        return letters[(cfg.alphabet_size - 1) // 2] * seg
    z = (x - x.mean()) / std
    means = paa(z, cfg.paa_segments)
    idx = np.searchsorted(np.array(gaussian_breakpoints(cfg.alphabet_size)), means, side="right")
    return "".join(letters[i] for i in idx)


def extract_3grams(symbols: str) -> frozenset:
    """Order-preserving, possibly gapped 3-grams that end with the last symbol."""
    n = len(symbols)
    if n < 3:
        return frozenset()
    last = symbols[-1]
    return frozenset(symbols[i] + symbols[j] + last
                     for i in range(n - 2) for j in range(i + 1, n - 1))


def build_top_gram_table(gram_sets: Iterable[Iterable[str]], top: int = 5) -> tuple:
    """Rank grams by how many series contain them; ties go to the smaller gram."""
    freq = Counter()
    for grams in gram_sets:
        freq.update(set(grams))
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    return tuple(g for g, _ in ranked[:top])


def top_gram_features(grams, top_table) -> list[float]:
    if top_table is None:
        raise ConfigurationError("top-gram table missing; run build-index first")
    out = [1.0 if g in grams else 0.0 for g in top_table]
    return out + [0.0] * (5 - len(out))
