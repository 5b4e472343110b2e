"""Cumulative-gain estimators.

``ImportanceWeightedTally`` keeps the importance-weighted sums used by the
randomized learners; ``EmpiricalMeanTally`` keeps plain reward sums and pull
counts for the phase-based baselines.
"""

from __future__ import annotations

import numpy as np

from .core import DomainError, NeverPulled, ProbabilityVector


class ImportanceWeightedTally:
    """Running importance-weighted gain estimates, one per arm."""

    def __init__(self, K: int):
        if K < 2:
            raise DomainError("need K >= 2")
        self.totals = np.zeros(K)
        self.rounds_seen = 0

    @property
    def K(self) -> int:
        return len(self.totals)

    def copy(self) -> "ImportanceWeightedTally":
        other = ImportanceWeightedTally(self.K)
        other.totals = self.totals.copy()
        other.rounds_seen = self.rounds_seen
        return other

    def update(self, pulled: int, reward: float, prob: float) -> None:
        """Record one pull of the 1-based arm ``pulled`` made with probability ``prob``."""
        if not 0.0 <= reward <= 1.0:
            raise DomainError(f"reward {reward!r} outside [0, 1]")
        if not prob > 0.0:
            raise DomainError("pull probability must be positive")
        self.totals[pulled - 1] += reward / prob
        self.rounds_seen += 1


def iw_update(
    tally: ImportanceWeightedTally, pulled: int, reward: float, probs: ProbabilityVector
) -> ImportanceWeightedTally:
    """Return a new tally with the pull added; ``tally`` is left unchanged.

    ``probs`` must be the vector the pull was sampled from.
    """
    out = tally.copy()
    out.update(pulled, reward, probs[pulled])
    return out


class EmpiricalMeanTally:
    def __init__(self, K: int):
        if K < 2:
            raise DomainError("need K >= 2")
        self.reward_sums = np.zeros(K)
        self.pull_counts = np.zeros(K, dtype=np.int64)
        self.rounds_seen = 0

    @property
    def K(self) -> int:
        return len(self.reward_sums)

    def update(self, pulled: int, reward: float) -> None:
        if not 0.0 <= reward <= 1.0:
            raise DomainError(f"reward {reward!r} outside [0, 1]")
        self.reward_sums[pulled - 1] += reward
        self.pull_counts[pulled - 1] += 1
        self.rounds_seen += 1

    def add_batch(self, arms, rewards) -> None:
        """Record many pulls at once; ``arms`` are 0-based."""
        arms = np.asarray(arms)
        self.reward_sums += np.bincount(arms, weights=rewards, minlength=self.K)
        self.pull_counts += np.bincount(arms, minlength=self.K)
        self.rounds_seen += len(arms)

    def mean(self, k: int) -> float:
        if self.pull_counts[k - 1] == 0:
            raise NeverPulled(f"arm {k} was never pulled")
        return float(self.reward_sums[k - 1] / self.pull_counts[k - 1])

    def means(self) -> np.ndarray:
        if np.any(self.pull_counts == 0):
            never = int(np.flatnonzero(self.pull_counts == 0)[0]) + 1
            raise NeverPulled(f"arm {never} was never pulled")
        return self.reward_sums / self.pull_counts


def empirical_estimate(tally: EmpiricalMeanTally, k: int, horizon: int) -> float:
    """Horizon-scaled empirical gain ``n * sum / count`` of the 1-based arm ``k``."""
    return horizon * tally.mean(k)
