"""Reward sources: Bernoulli instances, the eight benchmark presets and the
adversarial constructions used to fool or stress best-arm learners.

Every source is oblivious: the reward of arm k at round t is a fixed function
of (stream, k, t), evaluated lazily through counter-based uniforms. Reading a
cell never changes any other cell, so materializing the full K x n matrix with
:meth:`RewardSource.matrix` and replaying it gives the same trajectories as
on-demand evaluation.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .core import (
    TAG_REWARD,
    DomainError,
    GapProfile,
    NonUniqueBestArm,
    RngStream,
    _gaps,
    cell_uniforms,
    gaps_from_means,
    hindsight_gaps,
)

PRESET_IDS = "ABCDEFGH"

PRESET_NAMES = {
    "A": "One group of bad arms",
    "B": "Two groups of bad arms",
    "C": "Geometric progression",
    "D": "6 arms divided into three groups",
    "E": "Arithmetic progression",
    "F": "2 good arms and a large group of bad arms",
    "G": "Three groups of bad arms",
    "H": "Square-root gaps",
}


def preset(setup_id: str, *, setup_e_mode: str = "table", setup_c_gaps: str = "exact") -> list[float]:
    """Arm means of a benchmark setup; arm 1 always has mean 0.5.

    ``setup_e_mode="printed"`` uses means ``0.5 - 0.025 * i`` for arms 2..15,
    whose gaps do not reproduce the published complexity row; the default
    ``"table"`` uses gaps ``0.025 * (i - 1)``, which do.
    ``setup_c_gaps="rounded3"`` rounds the geometric gaps of setup C to three
    decimals before forming the means.
    """
    s = setup_id.upper()
    if s == "A":
        return [0.5] + [0.4] * 19
    if s == "B":
        return [0.5] + [0.42] * 5 + [0.38] * 14
    if s == "C":
        if setup_c_gaps not in ("exact", "rounded3"):
            raise DomainError(f"unknown setup_c_gaps mode {setup_c_gaps!r}")
        gaps = [0.37**i for i in (2, 3, 4)]
        if setup_c_gaps == "rounded3":
            gaps = [round(g, 3) for g in gaps]
        return [0.5] + [0.5 - g for g in gaps]
    if s == "D":
        return [0.5, 0.42, 0.4, 0.4, 0.35, 0.35]
    if s == "E":
        if setup_e_mode == "table":
            return [0.5] + [0.5 - 0.025 * (i - 1) for i in range(2, 16)]
        if setup_e_mode == "printed":
            return [0.5] + [0.5 - 0.025 * i for i in range(2, 16)]
        raise DomainError(f"unknown setup_e_mode {setup_e_mode!r}")
    if s == "F":
        return [0.5, 0.48] + [0.37] * 18
    if s == "G":
        return [0.5] + [0.45] * 5 + [0.43] * 14 + [0.38] * 10
    if s == "H":
        K = 100
        return [0.5] + [0.5 - 0.25 * math.sqrt(i / (2 * K)) for i in range(2, K + 1)]
    raise DomainError(f"unknown setup {setup_id!r}; expected one of {PRESET_IDS}")


class RewardSource:
    """Common interface. ``rewards`` evaluates cells for a batch of streams.

    ``keys`` are per-stream keys (see :func:`robust_bai.core.stream_keys`),
    ``arms`` are 0-based, ``t`` is a 1-based round (scalar or array).
    """

    kind: str
    K: int
    n: int | None
    stochastic: bool

    def rewards(self, keys, arms, t) -> np.ndarray:
        raise NotImplementedError

    def expected_totals(self, n: int) -> np.ndarray:
        raise NotImplementedError

    def best_arm(self) -> int:
        """1-based best arm of a stationary stochastic source."""
        raise NotImplementedError

    def matrix(self, stream: RngStream, n: int | None = None) -> np.ndarray:
        n = self._horizon(n)
        t = np.arange(1, n + 1)[None, :]
        arms = np.arange(self.K)[:, None]
        return self.rewards(stream.key, arms, t)

    def row_sums(self, keys, n: int | None = None, chunk: int = 1 << 14) -> np.ndarray:
        """Cumulative gains (B x K) of the realized matrices for a batch of streams."""
        n = self._horizon(n)
        keys = np.asarray(keys)
        out = np.zeros((len(keys), self.K))
        arms = np.arange(self.K)[None, :, None]
        for start in range(1, n + 1, chunk):
            t = np.arange(start, min(n, start + chunk - 1) + 1)[None, None, :]
            out += self.rewards(keys[:, None, None], arms, t).sum(axis=2)
        return out

    def _horizon(self, n):
        n = self.n if n is None else n
        if n is None:
            raise DomainError("this source needs an explicit horizon")
        if self.n is not None and n > self.n:
            raise DomainError(f"source only defines {self.n} rounds")
        return n


class SegmentedSource(RewardSource):
    """Piecewise-stationary source.

    Segment ``s`` covers rounds ``(ends[s-1], ends[s]]``. Within a segment each
    arm is Bernoulli with mean ``values[s, k]``, or, where ``deterministic[s, k]``
    is set, always pays exactly ``values[s, k]``.
    """

    def __init__(self, kind, ends, values, deterministic=None, *, n=None, stochastic=False, label=""):
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if deterministic is None:
            deterministic = np.zeros(values.shape, dtype=bool)
        deterministic = np.atleast_2d(np.asarray(deterministic, dtype=bool))
        if values.shape != deterministic.shape or values.shape[0] != len(ends):
            raise DomainError("one row of values per segment is required")
        if values.shape[1] < 2:
            raise DomainError("need K >= 2")
        if np.any(~np.isfinite(values)) or np.any(values < 0.0) or np.any(values > 1.0):
            raise DomainError("all per-round means must lie in [0, 1]")
        self.kind = kind
        self.ends = np.asarray(ends, dtype=np.int64)
        self.values = values
        self.deterministic = deterministic
        self.K = values.shape[1]
        self.n = n
        self.stochastic = stochastic
        self.label = label

    def rewards(self, keys, arms, t):
        t = np.asarray(t)
        if self.n is not None and np.any(t > self.n):
            raise DomainError(f"round beyond the horizon {self.n}")
        if len(self.ends) == 1:
            s = 0
        else:
            s = np.minimum(np.searchsorted(self.ends, t, side="left"), len(self.ends) - 1)
        m = self.values[s, arms]
        d = self.deterministic[s, arms]
        u = cell_uniforms(keys, TAG_REWARD, arms, t)
        return np.where(d, m, (u < m).astype(np.float64))

    def row_sums(self, keys, n: int | None = None, chunk: int = 1 << 14) -> np.ndarray:
        from . import _kernels

        n = self._horizon(n)
        keys = np.ascontiguousarray(np.atleast_1d(np.asarray(keys, dtype=np.uint64)))
        out = np.zeros((len(keys), self.K))
        _kernels.realized_totals(keys, n, self.ends, self.values, self.deterministic, out)
        return out

    def segment_lengths(self, n: int) -> np.ndarray:
        starts = np.concatenate([[0], self.ends[:-1]])
        ends = self.ends.copy()
        ends[-1] = max(ends[-1], n)
        return np.clip(np.minimum(ends, n) - starts, 0, None)

    def expected_totals(self, n: int) -> np.ndarray:
        return self.segment_lengths(n) @ self.values

    def best_arm(self) -> int:
        if not self.stochastic:
            raise DomainError("the truth of an adversarial source is its realized best arm")
        return gaps_from_means(self.values[0]).best_arm

    @property
    def means(self) -> tuple[float, ...]:
        return tuple(self.values[0].tolist())


class MatrixSource(RewardSource):
    """A fixed K x n reward matrix (no randomness)."""

    kind = "FixedMatrix"
    stochastic = False

    def __init__(self, matrix, label: str = "matrix"):
        g = np.asarray(matrix, dtype=float)
        if g.ndim != 2 or g.shape[0] < 2 or g.shape[1] < 1:
            raise DomainError("need a K x n matrix with K >= 2")
        if np.any(~np.isfinite(g)) or np.any(g < 0.0) or np.any(g > 1.0):
            raise DomainError("rewards must lie in [0, 1]")
        self.g = g
        self.K, self.n = g.shape
        self.label = label

    def rewards(self, keys, arms, t):
        arms, t = np.broadcast_arrays(np.asarray(arms), np.asarray(t))
        return self.g[arms, t - 1]

    def expected_totals(self, n: int) -> np.ndarray:
        return self.g[:, :n].sum(axis=1)

    def best_arm(self) -> int:
        return hindsight_gaps(self.g).best_arm


def load_matrix_csv(path) -> MatrixSource:
    """Read K rows x n columns of comma-separated reals, no header."""
    g = np.loadtxt(path, delimiter=",", ndmin=2)
    return MatrixSource(g, label=str(path))


def bernoulli_source(means: Sequence[float], n: int | None = None, label: str = "") -> SegmentedSource:
    m = np.asarray(means, dtype=float)
    if m.ndim != 1 or len(m) < 2:
        raise DomainError("need at least two arms")
    if np.any(~np.isfinite(m)) or np.any(m < 0.0) or np.any(m > 1.0):
        raise DomainError("arm means must lie in [0, 1]")
    end = n if n is not None else np.iinfo(np.int64).max
    return SegmentedSource("Bernoulli", [end], m[None, :], n=n, stochastic=True, label=label)


def _base_means(base_gaps: GapProfile, bar_k: int) -> np.ndarray:
    if base_gaps.best_arm != 1:
        raise DomainError("the base profile must have arm 1 as its best arm")
    if not 2 <= bar_k <= base_gaps.K:
        raise DomainError(f"bar_k must lie in [2, {base_gaps.K}]")
    gaps = np.asarray(base_gaps.gaps)
    base = 0.5 - gaps
    base[0] = 0.5
    return base


def _ceil(x: float) -> int:
    # guards against n * a landing a hair above an integer
    return math.ceil(x - 1e-9)


def switch_adversary_pair(
    base_gaps: GapProfile,
    bar_k: int,
    i: int,
    n: int,
    *,
    switch_round: int | None = None,
    pre_switch_mean: float | None = None,
    post_switch_mean: float | None = None,
) -> tuple[SegmentedSource, SegmentedSource]:
    """Stochastic/adversarial pair that differ only in arm ``bar_k`` early on.

    Base problem: arm 1 at 1/2, arm k at 1/2 - gap_k. In STO, ``bar_k`` is
    raised to 1/2 + gap_1/2 for the whole game. ADV keeps ``bar_k`` at its base
    mean for rounds ``t <= n_i`` and then switches to the STO mean, where
    ``n_i = ceil(n * gap_1 / gap_(i))`` and ``gap_(i)`` is the i-th smallest gap.

    The keyword overrides replace ``n_i`` and the pre/post-switch means of
    ``bar_k`` (the post-switch mean also sets ``bar_k`` in STO).
    """
    base = _base_means(base_gaps, bar_k)
    K = base_gaps.K
    if not 2 <= i <= K:
        raise DomainError(f"i must lie in [2, {K}]")
    if n < 1:
        raise DomainError("n must be positive")
    d1 = base_gaps.min_gap
    a_i = d1 / base_gaps.gap_of_rank(i)
    n_i = _ceil(n * a_i) if switch_round is None else int(switch_round)
    if not 0 <= n_i <= n:
        raise DomainError("switch round must lie in [0, n]")
    k = bar_k - 1
    post = 0.5 + d1 / 2 if post_switch_mean is None else post_switch_mean
    pre = base[k] if pre_switch_mean is None else pre_switch_mean

    sto = base.copy()
    sto[k] = post
    sto_src = SegmentedSource("SwitchSTO", [n], sto[None, :], n=n, stochastic=True, label="switch-sto")

    early = base.copy()
    early[k] = pre
    if n_i == n:
        adv_src = SegmentedSource("SwitchAdversary", [n], early[None, :], n=n, label="switch-adv")
    elif n_i == 0:
        adv_src = SegmentedSource("SwitchAdversary", [n], sto[None, :], n=n, label="switch-adv")
    else:
        adv_src = SegmentedSource("SwitchAdversary", [n_i, n], np.vstack([early, sto]), n=n, label="switch-adv")
    adv_src.switch_round = n_i
    adv_src.a_i = a_i
    return sto_src, adv_src


def two_phase_adversary_pair(base_gaps: GapProfile, bar_k: int, n: int) -> tuple[SegmentedSource, SegmentedSource]:
    """Two adversarial problems with different best arms.

    Both draw Bernoulli base rewards for the first ``ceil(n/2)`` rounds (ADV2
    raises ``bar_k`` by 2 * gap_1 there), then pay deterministically: 0 for
    every arm except ``bar_k``, which gets ``gap_bar_k - gap_1``.
    """
    base = _base_means(base_gaps, bar_k)
    if n < 2:
        raise DomainError("n must be at least 2")
    k = bar_k - 1
    d1 = base_gaps.min_gap
    dk = base_gaps.gaps[k]
    late_value = dk - d1
    if not 0.0 <= late_value <= 1.0:
        raise DomainError("gap_bar_k - gap_1 must lie in [0, 1]")
    half = math.ceil(n / 2)
    late = np.zeros(base_gaps.K)
    late[k] = late_value
    det = np.vstack([np.zeros(base_gaps.K, bool), np.ones(base_gaps.K, bool)])

    boosted = base.copy()
    boosted[k] = base[k] + 2 * d1
    adv1 = SegmentedSource("TwoPhaseAdversary", [half, n], np.vstack([base, late]), det, n=n, label="two-phase-adv1")
    adv2 = SegmentedSource("TwoPhaseAdversary", [half, n], np.vstack([boosted, late]), det, n=n, label="two-phase-adv2")
    adv1.half = adv2.half = half
    return adv1, adv2


def deception_adversary(means: Sequence[float], blackout_until: int, n: int) -> SegmentedSource:
    """All arms pay 0 up to round ``blackout_until``, then Bernoulli(means)."""
    m = np.asarray(means, dtype=float)
    if not 0 <= blackout_until <= n:
        raise DomainError("blackout_until must lie in [0, n]")
    if blackout_until == 0:
        return SegmentedSource("DeceptionAdversary", [n], m[None, :], n=n, label="deception")
    zeros = np.zeros_like(m)
    if blackout_until == n:
        return SegmentedSource("DeceptionAdversary", [n], zeros[None, :], np.ones((1, len(m)), bool), n=n, label="deception")
    det = np.vstack([np.ones(len(m), bool), np.zeros(len(m), bool)])
    return SegmentedSource("DeceptionAdversary", [blackout_until, n], np.vstack([zeros, m]), det, n=n, label="deception")


def expected_hindsight_gaps(source: RewardSource, n: int) -> np.ndarray:
    """Per-arm gaps of the expected cumulative gains, as per-round averages."""
    totals = source.expected_totals(n)
    if np.count_nonzero(totals == totals.max()) > 1:
        raise NonUniqueBestArm("expected cumulative gains are tied at the top")
    return _gaps(np.asarray(totals, dtype=float)) / n


def estimate_low_pull_arm(learner_kind: str, source: RewardSource, n: int, phase_end: int, reps: int, stream: RngStream) -> int:
    """Arm in [2, K] with the fewest average pulls over rounds 1..phase_end.

    The learner is run ``reps`` times against ``source`` with child streams of
    ``stream``; ties go to the lower index.
    """
    from .learners import play_batch

    if reps < 100:
        raise DomainError("reps must be at least 100")
    if not 1 <= phase_end <= n:
        raise DomainError("phase_end must lie in [1, n]")
    ids = [stream.child(j).stream_id for j in range(reps)]
    result = play_batch(learner_kind, source, n, stream.master_seed, ids, count_until=phase_end)
    avg = result.early_counts.mean(axis=0)
    return int(np.argmin(avg[1:])) + 2
