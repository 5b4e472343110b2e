"""Fixed-budget best-arm learners.

Randomized learners (Rule, P1 and their mixture) sample one arm per round
and recommend the arm with the largest importance-weighted gain. The phase
based baselines (Successive Rejects, Sequential Halving, static uniform
allocation) follow deterministic pull schedules and compare empirical means.

Per-round policies are exposed as plain functions for inspection; episodes
are played by :func:`play_batch`, which runs a batch of independent episodes.
Each episode only depends on its own stream, so its result does not depend on
which batch it ran in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .core import (
    BudgetTooSmall,
    DomainError,
    ProbabilityVector,
    RngStream,
    harmonic,
    rank_by_value,
    stream_keys,
)
from .estimators import EmpiricalMeanTally, ImportanceWeightedTally

RANDOMIZED = ("Rule", "P1", "MixedP1Rule")
SCHEDULED = ("SR", "SH", "StaticUniform")
LEARNER_KINDS = RANDOMIZED + SCHEDULED

_ALIASES = {
    "rule": "Rule",
    "p1": "P1",
    "mixedp1rule": "MixedP1Rule",
    "mixed": "MixedP1Rule",
    "mix": "MixedP1Rule",
    "sr": "SR",
    "sh": "SH",
    "staticuniform": "StaticUniform",
    "static": "StaticUniform",
    "uniform": "StaticUniform",
}


def learner_kind(name: str) -> str:
    key = name.replace("-", "").replace("_", "").replace(" ", "").lower()
    try:
        return _ALIASES[key]
    except KeyError:
        raise DomainError(f"unknown learner {name!r}; expected one of {', '.join(LEARNER_KINDS)}") from None


# --- per-round policies -------------------------------------------------------


def rule_policy(K: int, t: int | None = None) -> ProbabilityVector:
    """Uniform sampling; the same vector at every round."""
    if K < 2:
        raise DomainError("need K >= 2")
    return ProbabilityVector((1.0 / K,) * K)


@lru_cache(maxsize=None)
def _rank_probs(kind: str, K: int) -> tuple[np.ndarray, np.ndarray]:
    # probability assigned to the arm holding each rank, and its running sum
    ranks = np.arange(1, K + 1)
    zipf = 1.0 / (ranks * harmonic(K))
    if kind == "P1":
        p = zipf
    elif kind == "MixedP1Rule":
        p = 0.5 / K + 0.5 * zipf
    else:
        p = np.full(K, 1.0 / K)
    p.setflags(write=False)
    cdf = np.cumsum(p)
    cdf.setflags(write=False)
    return p, cdf


def _policy_from_ranks(kind: str, tally: ImportanceWeightedTally) -> ProbabilityVector:
    p_rank, _ = _rank_probs(kind, tally.K)
    ranks = rank_by_value(tally.totals)
    return ProbabilityVector(tuple(p_rank[ranks - 1].tolist()))


def p1_policy(tally: ImportanceWeightedTally) -> ProbabilityVector:
    """Arm of estimated rank r is drawn with probability 1 / (r * H_K)."""
    return _policy_from_ranks("P1", tally)


def mixed_policy(tally: ImportanceWeightedTally) -> ProbabilityVector:
    """Even mixture of uniform sampling and :func:`p1_policy`.

    The mixture is drawn once per round, and the same effective probability
    enters the importance weight.
    """
    return _policy_from_ranks("MixedP1Rule", tally)


def recommend_iw(tally: ImportanceWeightedTally) -> int:
    """1-based arm with the largest estimate; ties go to the lowest index."""
    return int(np.argmax(tally.totals)) + 1


# --- deterministic schedules --------------------------------------------------


@lru_cache(maxsize=None)
def _log_bar(K: int) -> Fraction:
    return Fraction(1, 2) + sum((Fraction(1, i) for i in range(2, K + 1)), Fraction(0))


def sr_phase_lengths(K: int, n: int) -> list[int]:
    """Cumulative per-arm pulls n_1 <= ... <= n_{K-1} of Successive Rejects."""
    if K < 2:
        raise DomainError("need K >= 2")
    if n < K * (K + 1) // 2:
        raise BudgetTooSmall(f"Successive Rejects needs n >= K(K+1)/2 = {K * (K + 1) // 2}")
    lb = _log_bar(K)
    return [math.ceil(Fraction(n - K) / (lb * (K + 1 - k))) for k in range(1, K)]


def sr_pull_counts(K: int, n: int) -> list[int]:
    """Total pulls per phase of Successive Rejects; the last phase takes the rest."""
    nk = sr_phase_lengths(K, n)
    out, prev, used = [], 0, 0
    for j in range(1, K - 1):
        c = (nk[j - 1] - prev) * (K - j + 1)
        out.append(c)
        used += c
        prev = nk[j - 1]
    out.append(n - used)
    return out


def sh_num_phases(K: int) -> int:
    return (K - 1).bit_length()


def sh_schedule(K: int, n: int) -> list[tuple[int, int]]:
    """(active arms, per-arm pulls) for each Sequential Halving phase.

    The final phase is listed with its nominal per-arm budget; the rounds left
    over at the end are also played in that phase.
    """
    if K < 2:
        raise DomainError("need K >= 2")
    L = sh_num_phases(K)
    if n < K * L:
        raise BudgetTooSmall(f"Sequential Halving needs n >= K * ceil(log2 K) = {K * L}")
    out, active = [], K
    for _ in range(L):
        out.append((active, n // (active * L)))
        active = (active + 1) // 2
    return out


def static_uniform_counts(K: int, n: int) -> np.ndarray:
    """Round-robin allocation; the first ``n mod K`` arms get one extra pull."""
    counts = np.full(K, n // K, dtype=np.int64)
    counts[: n % K] += 1
    return counts


@dataclass
class EpisodeLog:
    """One episode: per-round pulled arm (1-based), probability used and reward."""

    arms: np.ndarray
    probs: np.ndarray
    rewards: np.ndarray
    recommendation: int

    def __len__(self) -> int:
        return len(self.arms)

    @property
    def pulls(self) -> list[tuple[int, int, float, float]]:
        return [
            (t + 1, int(a), float(p), float(g))
            for t, (a, p, g) in enumerate(zip(self.arms, self.probs, self.rewards))
        ]

    def pull_counts(self, K: int, until: int | None = None) -> np.ndarray:
        arms = self.arms if until is None else self.arms[:until]
        return np.bincount(arms - 1, minlength=K)


def _worst_active(tally: EmpiricalMeanTally, active: list[int]) -> int:
    means = tally.reward_sums[active] / tally.pull_counts[active]
    order = np.argsort(-means, kind="stable")
    return active[order[-1]]


def _top_active(sums, counts, active: list[int], keep: int) -> list[int]:
    means = sums[active] / counts[active]
    order = np.argsort(-means, kind="stable")
    return sorted(active[j] for j in order[:keep])


def _play_rounds(source, key, arms: np.ndarray, t0: int):
    rounds = np.arange(t0 + 1, t0 + len(arms) + 1)
    return source.rewards(key, arms, rounds)


def _sr_episode(source, n: int, key):
    K = source.K
    nk = sr_phase_lengths(K, n)
    tally = EmpiricalMeanTally(K)
    active = list(range(K))
    seq_arms, seq_rewards = [], []
    t, prev = 0, 0
    for j in range(1, K):
        if j < K - 1:
            arms = np.tile(np.array(active), nk[j - 1] - prev)
            prev = nk[j - 1]
        else:
            arms = np.resize(np.array(active), n - t)
        g = _play_rounds(source, key, arms, t)
        tally.add_batch(arms, g)
        seq_arms.append(arms)
        seq_rewards.append(g)
        t += len(arms)
        active.remove(_worst_active(tally, active))
    return active[0], np.concatenate(seq_arms), np.concatenate(seq_rewards)


def _sh_episode(source, n: int, key):
    K = source.K
    schedule = sh_schedule(K, n)
    active = list(range(K))
    seq_arms, seq_rewards = [], []
    t = 0
    for ell, (_, per_arm) in enumerate(schedule):
        if ell < len(schedule) - 1:
            arms = np.tile(np.array(active), per_arm)
        else:
            arms = np.resize(np.array(active), n - t)
        g = _play_rounds(source, key, arms, t)
        sums = np.bincount(arms, weights=g, minlength=K)
        counts = np.bincount(arms, minlength=K)
        seq_arms.append(arms)
        seq_rewards.append(g)
        t += len(arms)
        keep = 1 if ell == len(schedule) - 1 else (len(active) + 1) // 2
        active = _top_active(sums, counts, active, keep)
    return active[0], np.concatenate(seq_arms), np.concatenate(seq_rewards)


def _static_episode(source, n: int, key):
    K = source.K
    if n < K:
        raise BudgetTooSmall(f"static uniform allocation needs n >= K = {K}")
    arms = np.resize(np.arange(K), n)
    g = _play_rounds(source, key, arms, 0)
    tally = EmpiricalMeanTally(K)
    tally.add_batch(arms, g)
    return int(np.argmax(tally.means())), arms, g


_SCHEDULE_EPISODES = {"SR": _sr_episode, "SH": _sh_episode, "StaticUniform": _static_episode}


# --- batched driver -----------------------------------------------------------


@dataclass
class BatchResult:
    recommendations: np.ndarray  # 1-based, one per episode
    early_counts: np.ndarray | None = None  # pulls per arm over rounds 1..count_until
    totals: np.ndarray | None = None  # final importance-weighted estimates
    logs: list[EpisodeLog] | None = None


def play_batch(
    kind: str,
    source,
    n: int,
    master_seed: int,
    stream_ids: Sequence[int],
    *,
    record: bool = False,
    count_until: int | None = None,
) -> BatchResult:
    """Play one episode of ``n`` rounds per stream id against ``source``."""
    kind = learner_kind(kind)
    if n < 1:
        raise DomainError("n must be positive")
    if source.n is not None and n > source.n:
        raise DomainError(f"the source only defines {source.n} rounds")
    keys = stream_keys(master_seed, np.asarray(stream_ids, dtype=np.uint64))
    if kind in RANDOMIZED:
        return _play_randomized(kind, source, n, keys, record, count_until)

    episode = _SCHEDULE_EPISODES[kind]
    recs = np.empty(len(keys), dtype=np.int64)
    early = np.zeros((len(keys), source.K), dtype=np.int64) if count_until else None
    logs = [] if record else None
    for b, key in enumerate(keys):
        rec, arms, g = episode(source, n, key[None])
        recs[b] = rec + 1
        if count_until:
            early[b] = np.bincount(arms[:count_until], minlength=source.K)
        if record:
            logs.append(EpisodeLog(arms + 1, np.ones(n), g, rec + 1))
    return BatchResult(recs, early, None, logs)


def _play_randomized(kind, source, n, keys, record, count_until) -> BatchResult:
    from . import _kernels

    K = source.K
    B = len(keys)
    p_rank, cdf = _rank_probs(kind, K)
    if getattr(source, "kind", None) == "FixedMatrix":
        mode = _kernels.SOURCE_MATRIX
        ends, values, det = np.zeros(1, np.int64), np.zeros((1, K)), np.zeros((1, K), bool)
        matrix = source.g
    else:
        mode = _kernels.SOURCE_SEGMENTED
        ends, values, det = source.ends, source.values, source.deterministic
        matrix = np.zeros((1, 1))
    recs = np.empty(B, dtype=np.int64)
    totals = np.empty((B, K))
    early = np.zeros((B, K), dtype=np.int64)
    shape = (B, n) if record else (1, 1)
    arm_log = np.zeros(shape, dtype=np.int64)
    prob_log = np.zeros(shape)
    reward_log = np.zeros(shape)
    _kernels.run_randomized(
        _kernels.KIND_RULE if kind == "Rule" else _kernels.KIND_RANKED,
        keys, n, K, p_rank, cdf, mode, ends, values, det, matrix,
        count_until or 0, record, recs, totals, early, arm_log, prob_log, reward_log,
    )
    logs = None
    if record:
        logs = [EpisodeLog(arm_log[b], prob_log[b], reward_log[b], int(recs[b])) for b in range(B)]
    return BatchResult(recs, early if count_until else None, totals, logs)


def play_episode(kind: str, source, n: int, stream: RngStream) -> EpisodeLog:
    return play_batch(kind, source, n, stream.master_seed, [stream.stream_id], record=True).logs[0]


def successive_rejects(env, n: int, rng: RngStream) -> EpisodeLog:
    return play_episode("SR", env, n, rng)


def sequential_halving(env, n: int, rng: RngStream) -> EpisodeLog:
    return play_episode("SH", env, n, rng)


def static_uniform(env, n: int, rng: RngStream) -> EpisodeLog:
    return play_episode("StaticUniform", env, n, rng)
