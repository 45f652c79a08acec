"""Threshold placement on the target and class-label encoding.

A set of S cut points splits the target range into S+1 intervals. Each cut
point defines one binary subproblem ("is y at or below this threshold?");
alternatively the intervals themselves define a single multiclass problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

EQUAL_FREQUENCY = "equal_frequency"
EQUAL_WIDTH = "equal_width"

BINARY_PER_THRESHOLD = "binary_per_threshold"
MULTICLASS_INTERVAL = "multiclass_interval"


@dataclass(frozen=True)
class ThresholdSet:
    """S strictly increasing cut points over the target range."""

    thresholds: np.ndarray
    method: str

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=np.float64)
        object.__setattr__(self, "thresholds", t)
        if t.ndim != 1 or t.size < 1:
            raise DataError("a threshold set needs at least one cut point")
        if not np.all(np.diff(t) > 0):
            raise DataError("thresholds must be strictly increasing")

    @property
    def S(self) -> int:
        return int(self.thresholds.size)


@dataclass(frozen=True)
class ClassLabels:
    """Encoded labels for the threshold subproblems.

    binary_per_threshold: ``labels`` has shape (S, n), row i is 1{y <= t_i}.
    multiclass_interval:  ``labels`` has shape (n,), entry k means
    y lies in (t_k, t_{k+1}] with t_0 = -inf and t_{S+1} = +inf.
    """

    encoding: str
    labels: np.ndarray = field(repr=False)


def _interpolated_quantile(sorted_y: np.ndarray, level: float) -> float:
    """Linear interpolation between order statistics at rank (n-1)*level."""
    n = sorted_y.size
    rank = (n - 1) * level
    lo = math.floor(rank)
    frac = rank - lo
    if lo + 1 >= n:
        return float(sorted_y[lo])
    return float(sorted_y[lo] + frac * (sorted_y[lo + 1] - sorted_y[lo]))


def equal_frequency_thresholds(y: np.ndarray, S: int) -> ThresholdSet:
    """Cut points at the empirical quantiles i/(S+1), i = 1..S.

    Each of the S+1 intervals then holds roughly n/(S+1) training values.
    Raises if y is too small, has fewer than S+1 distinct values, or if
    ties collapse two cut points to the same value: silently dropping a
    duplicate threshold would shrink the augmented-feature width contract.
    """
    y = np.asarray(y, dtype=np.float64)
    if S < 1:
        raise DataError("S must be >= 1")
    n = y.size
    if n < S + 1:
        raise DataError(f"need at least S+1={S + 1} values, got {n}")
    if np.unique(y).size < S + 1:
        raise DataError(
            f"need at least S+1={S + 1} distinct target values for "
            f"{S} equal-frequency thresholds"
        )
    ys = np.sort(y)
    cuts = np.empty(S, dtype=np.float64)
    for i in range(1, S + 1):
        cuts[i - 1] = _interpolated_quantile(ys, i / (S + 1))
    if not np.all(np.diff(cuts) > 0):
        raise DataError("target ties collapse equal-frequency thresholds")
    return ThresholdSet(thresholds=cuts, method=EQUAL_FREQUENCY)


def equal_width_thresholds(y: np.ndarray, S: int) -> ThresholdSet:
    """Cut points splitting [min(y), max(y)] into S+1 equal-width intervals."""
    y = np.asarray(y, dtype=np.float64)
    if S < 1:
        raise DataError("S must be >= 1")
    lo, hi = float(np.min(y)), float(np.max(y))
    if not hi > lo:
        raise DataError("equal-width thresholds need max(y) > min(y)")
    k = np.arange(1, S + 1, dtype=np.float64)
    cuts = lo + k * (hi - lo) / (S + 1)
    return ThresholdSet(thresholds=cuts, method=EQUAL_WIDTH)


def encode_labels(y: np.ndarray, ts: ThresholdSet, encoding: str = BINARY_PER_THRESHOLD) -> ClassLabels:
    """Encode targets against a threshold set.

    Binary rows are monotone per instance: once y exceeds a cut point it
    exceeds all smaller ones, so row i is 1{y <= t_i} and the multiclass
    interval index equals the count of binary zeros.
    """
    y = np.asarray(y, dtype=np.float64)
    cuts = ts.thresholds
    if encoding == BINARY_PER_THRESHOLD:
        labels = (y[None, :] <= cuts[:, None]).astype(np.int8)
        return ClassLabels(encoding=encoding, labels=labels)
    if encoding == MULTICLASS_INTERVAL:
        idx = np.searchsorted(cuts, y, side="left")
        # searchsorted(left) puts y == t_k at index k, i.e. inside (t_{k-1}, t_k]
        return ClassLabels(encoding=encoding, labels=idx.astype(np.int64))
    raise DataError(f"unknown label encoding: {encoding!r}")
