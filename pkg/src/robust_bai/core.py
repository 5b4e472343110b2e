"""Shared domain types: gaps, rankings, harmonic numbers and seeded streams.

Arms are numbered from 1 in every public interface. Internally arrays are
0-based; conversion happens at the boundary (``ArmIndex`` values and the
``rank_of`` / ``best_arm`` fields are 1-based).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "BaiError",
    "DomainError",
    "NonUniqueBestArm",
    "NeverPulled",
    "BudgetTooSmall",
    "GapProfile",
    "HindsightGaps",
    "ProbabilityVector",
    "RngStream",
    "gaps_from_means",
    "hindsight_gaps",
    "harmonic",
    "rank_by_value",
    "cell_uniforms",
]


class BaiError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BaiError, ValueError):
    pass


class NonUniqueBestArm(BaiError, ValueError):
    pass


class NeverPulled(BaiError, ValueError):
    pass


class BudgetTooSmall(BaiError, ValueError):
    pass


def _gaps(values: np.ndarray) -> np.ndarray:
    # |max_{i != k} v_i - v_k| for every k, in O(K)
    order = np.argsort(-values, kind="stable")
    top, second = values[order[0]], values[order[1]]
    others_max = np.full(values.shape, top)
    others_max[order[0]] = second
    return np.abs(others_max - values)


def rank_by_value(values: Sequence[float]) -> np.ndarray:
    """Rank arms by decreasing value; ties go to the lower arm index.

    Returns an int array ``ranks`` where ``ranks[k]`` is the 1-based rank of
    the (0-based) arm ``k``.
    """
    v = np.asarray(values, dtype=float)
    order = np.argsort(-v, kind="stable")
    ranks = np.empty(len(v), dtype=np.int64)
    ranks[order] = np.arange(1, len(v) + 1)
    return ranks


def harmonic(K: int) -> float:
    """K-th harmonic number, sum of 1/k for k = 1..K."""
    if K < 1:
        raise DomainError(f"harmonic number needs K >= 1, got {K}")
    return math.fsum(1.0 / k for k in range(1, K + 1))


@dataclass(frozen=True)
class GapProfile:
    means: tuple[float, ...]
    gaps: tuple[float, ...]
    sorted_gaps: tuple[float, ...]
    rank_of: tuple[int, ...]

    @property
    def K(self) -> int:
        return len(self.means)

    @property
    def best_arm(self) -> int:
        return self.rank_of.index(1) + 1

    @property
    def min_gap(self) -> float:
        return self.sorted_gaps[0]

    def gap_of_rank(self, r: int) -> float:
        """Gap of the arm with 1-based rank ``r``."""
        return self.sorted_gaps[r - 1]

    @property
    def h1(self) -> float:
        return math.fsum(1.0 / g**2 for g in self.gaps)


def gaps_from_means(means: Sequence[float]) -> GapProfile:
    m = np.asarray(means, dtype=float)
    if m.ndim != 1 or len(m) < 2:
        raise DomainError("need at least two arms")
    if np.any(~np.isfinite(m)) or np.any(m < 0.0) or np.any(m > 1.0):
        raise DomainError("arm means must lie in [0, 1]")
    if np.count_nonzero(m == m.max()) > 1:
        raise NonUniqueBestArm("the maximum mean is attained by more than one arm")
    gaps = _gaps(m)
    ranks = rank_by_value(m)
    sorted_gaps = np.empty_like(gaps)
    sorted_gaps[ranks - 1] = gaps
    return GapProfile(
        means=tuple(m.tolist()),
        gaps=tuple(gaps.tolist()),
        sorted_gaps=tuple(sorted_gaps.tolist()),
        rank_of=tuple(ranks.tolist()),
    )


@dataclass(frozen=True)
class HindsightGaps:
    cumulative_gains: tuple[float, ...]
    gaps: tuple[float, ...]
    best_arm: int
    horizon: int

    @property
    def K(self) -> int:
        return len(self.gaps)

    @property
    def sorted_gaps(self) -> tuple[float, ...]:
        return tuple(sorted(self.gaps))

    @property
    def min_gap(self) -> float:
        return min(self.gaps)


def hindsight_gaps(rewards) -> HindsightGaps:
    """Gaps of a realized K x n reward matrix, as per-round averages."""
    g = np.asarray(rewards, dtype=float)
    if g.ndim != 2 or g.shape[0] < 2 or g.shape[1] < 1:
        raise DomainError("rewards must be a K x n matrix with K >= 2, n >= 1")
    if np.any(g < 0.0) or np.any(g > 1.0):
        raise DomainError("rewards must lie in [0, 1]")
    n = g.shape[1]
    totals = g.sum(axis=1)
    if np.count_nonzero(totals == totals.max()) > 1:
        raise NonUniqueBestArm("cumulative gains are tied at the top")
    return HindsightGaps(
        cumulative_gains=tuple(totals.tolist()),
        gaps=tuple((_gaps(totals) / n).tolist()),
        best_arm=int(np.argmax(totals)) + 1,
        horizon=n,
    )


@dataclass(frozen=True)
class ProbabilityVector:
    probs: tuple[float, ...]

    def __post_init__(self):
        p = self.probs
        if len(p) < 1 or min(p) <= 0.0:
            raise DomainError("probabilities must be strictly positive")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise DomainError(f"probabilities sum to {math.fsum(p)!r}, not 1")

    def __getitem__(self, arm: int) -> float:
        """Probability of the 1-based ``arm``."""
        return self.probs[arm - 1]

    def __len__(self) -> int:
        return len(self.probs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs)


# --- counter-based randomness -------------------------------------------------
#
# Every random quantity in a simulation is a pure function of
# (master_seed, stream_id, tag, k, t). Rewards and learner coins can then be
# evaluated for any subset of cells in any order, and a batch of episodes gives
# bit-identical results to the same episodes run one by one.

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)
_K_MUL = np.uint64(0xD6E8FEB86659FD93)
_T_MUL = np.uint64(0xA0761D6478BD642F)
_TAG_MUL = np.uint64(0xE7037ED1A0B428DB)

TAG_REWARD = 1
TAG_LEARNER = 2


def _mix(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer
    x = x ^ (x >> np.uint64(30))
    x = x * _C1
    x = x ^ (x >> np.uint64(27))
    x = x * _C2
    return x ^ (x >> np.uint64(31))


def _u64(x) -> np.ndarray:
    # at least 1-d so that uint64 arithmetic wraps silently
    return np.atleast_1d(np.asarray(x)).astype(np.uint64)


def stream_keys(master_seed: int, stream_ids) -> np.ndarray:
    """Per-stream 64-bit keys; input to :func:`cell_uniforms`."""
    seed = _mix(_u64(master_seed & 0xFFFFFFFFFFFFFFFF) + _GOLD)
    return _mix(seed ^ _mix(_u64(stream_ids) * _GOLD + _GOLD))


def cell_uniforms(keys, tag: int, k, t) -> np.ndarray:
    """Uniform(0, 1) draws for cells (key, tag, k, t); arrays broadcast."""
    h = _mix(_u64(keys) ^ (_u64(tag) * _TAG_MUL))
    h = _mix(h + _u64(k) * _K_MUL)
    h = _mix(h ^ (_u64(t) * _T_MUL))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by (master_seed, stream_id)."""

    master_seed: int
    stream_id: int

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            v = getattr(self, name)
            if not 0 <= v < 2**64:
                raise DomainError(f"{name} must be a 64-bit unsigned integer")

    @property
    def key(self) -> np.ndarray:
        return stream_keys(self.master_seed, self.stream_id)

    def uniforms(self, tag: int, k, t) -> np.ndarray:
        return cell_uniforms(self.key, tag, k, t)

    def child(self, j: int) -> "RngStream":
        """A derived stream, independent of this one and of other children."""
        sub = _mix(_u64(self.stream_id) ^ _mix(_u64(j) + _K_MUL))
        return RngStream(self.master_seed, int(sub[0]))

    def generator(self) -> np.random.Generator:
        return np.random.default_rng([self.master_seed, self.stream_id])
