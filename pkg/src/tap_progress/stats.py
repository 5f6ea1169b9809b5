"""Empirical-CDF utilities shared by every Monte Carlo check.

Empirical CDFs, Dvoretzky-Kiefer-Wolfowitz (DKW) confidence radii,
Kolmogorov-Smirnov sup-distances, lag autocorrelation, and series thinning.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

__all__ = [
    "EmpiricalCdf",
    "dkw_epsilon",
    "ks_distance",
    "autocorrelation",
    "thin",
]


class EmpiricalCdf:
    """Right-continuous step CDF built from a sample.

    Immutable after construction; evaluation at t is the fraction of
    samples <= t.
    """

    def __init__(self, samples):
        arr = np.sort(np.asarray(samples, dtype=float))
        if arr.size == 0:
            raise ValueError("need at least one sample")
        self.sorted_samples = arr
        self.n = int(arr.size)

    def eval(self, t):
        """Fraction of samples <= t; scalar or array."""
        return np.searchsorted(self.sorted_samples, t, side="right") / self.n

    def __call__(self, t):
        return self.eval(t)


def dkw_epsilon(n: int, confidence: float) -> float:
    """Two-sided DKW band half-width: sqrt(ln(2/(1-confidence)) / (2n))."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must be in (0, 1), got {confidence}")
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n))


def ks_distance(cdf: EmpiricalCdf, reference) -> float:
    """Sup-norm distance between an empirical CDF and a reference CDF.

    Evaluates both one-sided gaps at every jump point: the empirical CDF
    attains i/n just after sample i and (i-1)/n just before it. A callable
    reference is treated as continuous; passing another EmpiricalCdf
    compares its left limits at the jumps, so a step function has distance
    zero from itself.
    """
    points = cdf.sorted_samples
    if isinstance(reference, EmpiricalCdf):
        ref = np.asarray(reference.eval(points), dtype=float)
        ref_left = np.searchsorted(reference.sorted_samples, points, side="left") / reference.n
    else:
        ref = np.asarray(reference(points), dtype=float)
        ref_left = ref
    upper = np.arange(1, cdf.n + 1) / cdf.n
    lower = np.arange(0, cdf.n) / cdf.n
    return float(max(np.abs(upper - ref).max(), np.abs(ref_left - lower).max()))


def autocorrelation(series, lag: int = 1) -> float:
    """Lag-k sample autocorrelation of a 1-d series."""
    x = np.asarray(series, dtype=float)
    if x.size <= lag:
        raise ValueError(f"series of length {x.size} too short for lag {lag}")
    x = x - x.mean()
    denom = float(np.dot(x, x))
    if denom == 0.0:
        return 0.0
    return float(np.dot(x[:-lag], x[lag:]) / denom)


def thin(series, factor: int):
    """Every factor-th element, starting at index 0."""
    if factor < 1:
        raise ValueError(f"thinning factor must be >= 1, got {factor}")
    return np.asarray(series, dtype=float)[::factor]
