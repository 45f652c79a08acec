"""CART trees on numeric features, compiled with numba.

Split search is exact greedy: candidates are midpoints between consecutive
sorted distinct feature values; classification minimizes weighted Gini
impurity, regression minimizes the summed within-child squared error.
Ties are broken toward the lowest feature index, then the lowest
threshold, so a fit is a pure function of (data, params, seed).

The in-kernel RNG is a splitmix64 twin of :mod:`probaug.rng`; per-node
feature draws consume it in depth-first, left-child-first node order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..errors import DataError

CLASSIFY = "classify"
REGRESS = "regress"

_DEPTH_UNLIMITED = np.int64(1 << 30)

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U27 = np.uint64(27)
_U30 = np.uint64(30)
_U31 = np.uint64(31)
_U32 = np.uint64(32)


@njit(cache=True, inline="always")
def _sm64(state):
    state = state + _GAMMA
    z = state
    z = (z ^ (z >> _U30)) * _MIX1
    z = (z ^ (z >> _U27)) * _MIX2
    z = z ^ (z >> _U31)
    return state, z


@njit(cache=True, inline="always")
def _rand_below(state, n):
    state, z = _sm64(state)
    return state, np.int64(((z >> _U32) * np.uint64(n)) >> _U32)


@njit(cache=True)
def _bootstrap_fill(seed, n, out):
    state = np.uint64(seed)
    for i in range(n):
        state, v = _rand_below(state, n)
        out[i] = v


@njit(cache=True)
def _grow_tree(X, y, samples, classify, max_depth, min_samples_leaf, max_features,
               seed, feat, thresh, left, right, val0, val1):
    """Grow one tree over ``samples`` (row indices, permuted in place).

    Node arrays must have capacity 2*len(samples)+1; returns node count.
    """
    m = samples.size
    d = X.shape[1]
    state = np.uint64(seed)

    st_node = np.empty(m + 2, np.int32)
    st_start = np.empty(m + 2, np.int64)
    st_end = np.empty(m + 2, np.int64)
    st_depth = np.empty(m + 2, np.int64)

    perm = np.arange(d)
    chosen = np.empty(max_features, np.int64)
    buf = np.empty(m, np.int64)
    vals = np.empty(m, np.float64)
    tgt = np.empty(m, np.float64)

    n_nodes = 1
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = m
    st_depth[0] = 0
    sp = 1

    while sp > 0:
        sp -= 1
        node = st_node[sp]
        start = st_start[sp]
        end = st_end[sp]
        depth = st_depth[sp]
        mn = end - start

        s = 0.0
        s2 = 0.0
        for i in range(start, end):
            v = y[samples[i]]
            s += v
            s2 += v * v

        if classify:
            pure = s == 0.0 or s == mn
        else:
            pure = (s2 - s * s / mn) <= 1e-12 * (1.0 + s2)
        searchable = (not pure) and depth < max_depth and mn >= 2 * min_samples_leaf

        best_feat = -1
        best_thresh = 0.0
        best_score = np.inf

        if searchable:
            k = max_features if max_features < d else d
            if k < d:
                for j in range(k):
                    state, r = _rand_below(state, d - j)
                    jj = j + r
                    tmp = perm[j]
                    perm[j] = perm[jj]
                    perm[jj] = tmp
                    chosen[j] = perm[j]
                for a in range(1, k):
                    key = chosen[a]
                    b = a - 1
                    while b >= 0 and chosen[b] > key:
                        chosen[b + 1] = chosen[b]
                        b -= 1
                    chosen[b + 1] = key

            for jj in range(k):
                f = chosen[jj] if k < d else jj
                for i in range(mn):
                    row = samples[start + i]
                    vals[i] = X[row, f]
                    tgt[i] = y[row]
                order = np.argsort(vals[:mn])

                if classify:
                    c1 = 0.0
                    for i in range(mn - 1):
                        o = order[i]
                        c1 += tgt[o]
                        vcur = vals[o]
                        vnext = vals[order[i + 1]]
                        if vcur < vnext:
                            mL = i + 1
                            mR = mn - mL
                            if mL >= min_samples_leaf and mR >= min_samples_leaf:
                                n1L = c1
                                n0L = mL - c1
                                n1R = s - c1
                                n0R = mR - n1R
                                score = mn - ((n1L * n1L + n0L * n0L) / mL
                                              + (n1R * n1R + n0R * n0R) / mR)
                                if score < best_score:
                                    best_score = score
                                    best_feat = f
                                    best_thresh = 0.5 * (vcur + vnext)
                else:
                    sL = 0.0
                    s2L = 0.0
                    for i in range(mn - 1):
                        o = order[i]
                        v = tgt[o]
                        sL += v
                        s2L += v * v
                        vcur = vals[o]
                        vnext = vals[order[i + 1]]
                        if vcur < vnext:
                            mL = i + 1
                            mR = mn - mL
                            if mL >= min_samples_leaf and mR >= min_samples_leaf:
                                sR = s - sL
                                score = (s2L - sL * sL / mL) + ((s2 - s2L) - sR * sR / mR)
                                if score < best_score:
                                    best_score = score
                                    best_feat = f
                                    best_thresh = 0.5 * (vcur + vnext)

        if best_feat < 0:
            feat[node] = -1
            if classify:
                val0[node] = mn - s
                val1[node] = s
            else:
                val0[node] = s / mn
                val1[node] = mn
            continue

        nl = start
        nr = 0
        for i in range(start, end):
            row = samples[i]
            if X[row, best_feat] <= best_thresh:
                samples[nl] = row
                nl += 1
            else:
                buf[nr] = row
                nr += 1
        for i in range(nr):
            samples[nl + i] = buf[i]

        left_id = n_nodes
        right_id = n_nodes + 1
        n_nodes += 2
        feat[node] = best_feat
        thresh[node] = best_thresh
        left[node] = left_id
        right[node] = right_id

        st_node[sp] = right_id
        st_start[sp] = nl
        st_end[sp] = end
        st_depth[sp] = depth + 1
        sp += 1
        st_node[sp] = left_id
        st_start[sp] = start
        st_end[sp] = nl
        st_depth[sp] = depth + 1
        sp += 1

    return n_nodes


@njit(cache=True)
def _predict_tree(feat, thresh, left, right, val0, val1, X, classify):
    n = X.shape[0]
    out = np.empty(n, np.float64)
    for r in range(n):
        node = 0
        while feat[node] >= 0:
            if X[r, feat[node]] <= thresh[node]:
                node = left[node]
            else:
                node = right[node]
        if classify:
            out[r] = 1.0 if val1[node] > val0[node] else 0.0
        else:
            out[r] = val0[node]
    return out


def _check_matrix(X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DataError("feature matrix must be 2-D")
    return X


def bootstrap_indices(seed: int, n: int) -> np.ndarray:
    """The n-sample with-replacement draw used for each forest tree."""
    out = np.empty(n, dtype=np.int64)
    _bootstrap_fill(np.uint64(seed), n, out)
    return out


@dataclass(frozen=True)
class Tree:
    """A fitted CART tree in flat-array form.

    ``feature`` is -1 at leaves. For classification leaves value0/value1
    hold the class counts; for regression leaves value0 holds the mean
    and value1 the sample count.
    """

    task: str
    feature: np.ndarray = field(repr=False)
    threshold: np.ndarray = field(repr=False)
    left: np.ndarray = field(repr=False)
    right: np.ndarray = field(repr=False)
    value0: np.ndarray = field(repr=False)
    value1: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Regression: leaf means. Classification: the leaf majority vote
        (0 or 1), ties resolved toward class 0."""
        X = _check_matrix(X)
        return _predict_tree(self.feature, self.threshold, self.left, self.right,
                             self.value0, self.value1, X, self.task == CLASSIFY)


def fit_tree(X: np.ndarray, y: np.ndarray, task: str = REGRESS,
             max_depth: int | None = None, min_samples_leaf: int = 1,
             feature_subsample: int | None = None, rng_seed: int = 0) -> Tree:
    """Fit a single greedy CART tree.

    ``feature_subsample`` draws that many features without replacement at
    every node from a stream derived from ``rng_seed``; None considers all
    features (no randomness is consumed).
    """
    X = _check_matrix(X)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n, d = X.shape
    if n < 1:
        raise DataError("cannot fit a tree on zero rows")
    if y.shape[0] != n:
        raise DataError("X and y row counts differ")
    if task not in (CLASSIFY, REGRESS):
        raise DataError(f"unknown task {task!r}")
    if task == CLASSIFY and not np.all((y == 0.0) | (y == 1.0)):
        raise DataError("classification labels must be 0/1")
    if min_samples_leaf < 1:
        raise DataError("min_samples_leaf must be >= 1")

    k = d if feature_subsample is None else int(feature_subsample)
    if not 1 <= k <= d:
        raise DataError(f"feature_subsample must be in [1, {d}]")
    depth = _DEPTH_UNLIMITED if max_depth is None else np.int64(max_depth)

    cap = 2 * n + 1
    feat = np.empty(cap, np.int32)
    thresh = np.zeros(cap, np.float64)
    left = np.zeros(cap, np.int32)
    right = np.zeros(cap, np.int32)
    val0 = np.zeros(cap, np.float64)
    val1 = np.zeros(cap, np.float64)
    samples = np.arange(n, dtype=np.int64)
    n_nodes = _grow_tree(X, y, samples, task == CLASSIFY, depth,
                         np.int64(min_samples_leaf), np.int64(k),
                         np.uint64(rng_seed), feat, thresh, left, right, val0, val1)
    sl = slice(0, n_nodes)
    return Tree(task=task, feature=feat[sl].copy(), threshold=thresh[sl].copy(),
                left=left[sl].copy(), right=right[sl].copy(),
                value0=val0[sl].copy(), value1=val1[sl].copy())
