"""Compiled inner loop for the randomized learners.

Mirrors the counter-based uniforms of :mod:`robust_bai.core` bit for bit;
``tests/test_learners.py`` checks the two against each other.
"""

import numpy as np
from numba import njit

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)
_K_MUL = np.uint64(0xD6E8FEB86659FD93)
_T_MUL = np.uint64(0xA0761D6478BD642F)
_TAG_MUL = np.uint64(0xE7037ED1A0B428DB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0

KIND_RULE = 0
KIND_RANKED = 1

SOURCE_SEGMENTED = 0
SOURCE_MATRIX = 1


@njit(cache=True, inline="always")
def _mix(x):
    x = x ^ (x >> _S30)
    x = x * _C1
    x = x ^ (x >> _S27)
    x = x * _C2
    return x ^ (x >> _S31)


@njit(cache=True, inline="always")
def _uniform(key, tag, k, t):
    h = _mix(key ^ (np.uint64(tag) * _TAG_MUL))
    h = _mix(h + np.uint64(k) * _K_MUL)
    h = _mix(h ^ (np.uint64(t) * _T_MUL))
    return np.float64(h >> _S11) * _INV53


@njit(cache=True)
def _reward(mode, key, k, t, ends, values, det, matrix):
    if mode == SOURCE_MATRIX:
        return matrix[k, t - 1]
    s = 0
    last = ends.shape[0] - 1
    while s < last and ends[s] < t:
        s += 1
    m = values[s, k]
    if det[s, k]:
        return m
    if _uniform(key, 1, k, t) < m:
        return 1.0
    return 0.0


@njit(cache=True)
def run_randomized(
    kind, keys, n, K, p_rank, cdf, mode, ends, values, det, matrix,
    count_until, record, recs, totals_out, early, arm_log, prob_log, reward_log,
):
    B = keys.shape[0]
    totals = np.zeros(K)
    order = np.zeros(K, dtype=np.int64)
    pos = np.zeros(K, dtype=np.int64)
    for b in range(B):
        key = keys[b]
        for k in range(K):
            totals[k] = 0.0
            order[k] = k
            pos[k] = k
        for t in range(1, n + 1):
            u = _uniform(key, 2, 0, t)
            if kind == KIND_RULE:
                a = int(u * K)
                if a > K - 1:
                    a = K - 1
                p = p_rank[0]
            else:
                r = 0
                while r < K - 1 and cdf[r] <= u:
                    r += 1
                a = order[r]
                p = p_rank[r]
            g = _reward(mode, key, a, t, ends, values, det, matrix)
            totals[a] += g / p
            if kind != KIND_RULE and g > 0.0:
                # the estimate of ``a`` only grows: bubble it towards rank 1
                j = pos[a]
                v = totals[a]
                while j > 0:
                    c = order[j - 1]
                    if totals[c] < v or (totals[c] == v and c > a):
                        order[j] = c
                        pos[c] = j
                        j -= 1
                    else:
                        break
                order[j] = a
                pos[a] = j
            if count_until > 0 and t <= count_until:
                early[b, a] += 1
            if record:
                arm_log[b, t - 1] = a + 1
                prob_log[b, t - 1] = p
                reward_log[b, t - 1] = g
        best = 0
        for k in range(1, K):
            if totals[k] > totals[best]:
                best = k
        recs[b] = best + 1
        for k in range(K):
            totals_out[b, k] = totals[k]


@njit(cache=True)
def realized_totals(keys, n, ends, values, det, out):
    """Cumulative gains of a segmented source for each key, into ``out`` (B x K)."""
    B = keys.shape[0]
    S = ends.shape[0]
    K = values.shape[1]
    for b in range(B):
        key = keys[b]
        start = 1
        for s in range(S):
            stop = n if s == S - 1 else min(ends[s], n)
            for k in range(K):
                m = values[s, k]
                if det[s, k]:
                    out[b, k] += m * max(stop - start + 1, 0)
                    continue
                c = 0
                for t in range(start, stop + 1):
                    if _uniform(key, 1, k, t) < m:
                        c += 1
                out[b, k] += c
            start = stop + 1
            if start > n:
                break
