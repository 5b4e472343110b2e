"""Monte Carlo estimation of misidentification rates and the theory overlay."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from ..complexity import h_p1_min, h_unif
from ..core import GapProfile, HindsightGaps, NonUniqueBestArm, RngStream, harmonic, stream_keys
from ..environments import MatrixSource, RewardSource, expected_hindsight_gaps
from ..learners import EpisodeLog, learner_kind, play_batch

# Repetitions are split into chunks of this size whatever the worker count, so
# the work units (and therefore every output) never depend on parallelism.
CHUNK = 250


def _realized_best(source: RewardSource, keys: np.ndarray, n: int) -> np.ndarray:
    """1-based realized best arm per key, 0 where the top is tied."""
    if isinstance(source, MatrixSource):
        totals = np.broadcast_to(source.expected_totals(n), (len(keys), source.K))
    else:
        totals = source.row_sums(keys, n)
    top = totals.max(axis=1, keepdims=True)
    tied = (totals == top).sum(axis=1) > 1
    return np.where(tied, 0, totals.argmax(axis=1) + 1)


def _truth(source: RewardSource, keys: np.ndarray, n: int) -> np.ndarray:
    if source.stochastic:
        return np.full(len(keys), source.best_arm())
    return _realized_best(source, keys, n)


def run_episode(kind: str, source: RewardSource, n: int, stream: RngStream) -> tuple[int, bool, EpisodeLog]:
    """Play one game; success means the recommendation equals the true best arm.

    The truth is the best mean for stochastic sources and the realized best
    cumulative gain otherwise.
    """
    log = play_batch(kind, source, n, stream.master_seed, [stream.stream_id], record=True).logs[0]
    truth = int(_truth(source, np.atleast_1d(stream.key), n)[0])
    if truth == 0:
        raise NonUniqueBestArm("the realized reward tensor has a tied best arm")
    return log.recommendation, log.recommendation == truth, log


def _count_chunk(args) -> tuple[int, int, int]:
    kind, source, n, master_seed, start, stop = args
    ids = np.arange(start, stop, dtype=np.uint64)
    recs = play_batch(kind, source, n, master_seed, ids).recommendations
    truth = _truth(source, stream_keys(master_seed, ids), n)
    valid = truth > 0
    errors = int(np.count_nonzero(recs[valid] != truth[valid]))
    return errors, int(np.count_nonzero(valid)), int(np.count_nonzero(~valid))


def count_errors(kind: str, source: RewardSource, n: int, repetitions: int, master_seed: int, workers: int = 1):
    """(errors, counted, tied) over repetitions 0..R-1, each its own stream."""
    tasks = [
        (kind, source, n, master_seed, s, min(s + CHUNK, repetitions))
        for s in range(0, repetitions, CHUNK)
    ]
    if workers <= 1 or len(tasks) == 1:
        parts = [_count_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_count_chunk, tasks))
    errors, counted, tied = (sum(col) for col in zip(*parts))
    return errors, counted, tied


def wilson_interval(errors: int, trials: int) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    lo, hi = proportion_confint(errors, trials, alpha=0.05, method="wilson")
    # at 0 or R errors the exact endpoint is 0 or 1; the closed form is off by rounding
    lo = 0.0 if errors == 0 else max(0.0, float(lo))
    hi = 1.0 if errors == trials else min(1.0, float(hi))
    return lo, hi


@dataclass(frozen=True)
class TheoryBounds:
    rule_adv: float
    p1_adv: float
    p1_sto: float | None

    @staticmethod
    def vacuous(value: float | None) -> bool | None:
        return None if value is None else value >= 1.0


def theoretical_bounds(gaps, K: int, n: int) -> TheoryBounds:
    """Rule's and P1's error bounds at horizon ``n``.

    ``gaps`` is a :class:`GapProfile`, a :class:`HindsightGaps` or a plain list
    of per-round gaps. P1's stochastic bound needs a GapProfile and is None
    otherwise. Values above 1 are returned as they are.
    """
    if isinstance(gaps, (GapProfile, HindsightGaps)):
        hu = h_unif(gaps)
    else:
        g = np.sort(np.asarray(gaps, dtype=float))
        hu = K / g[0] ** 2
    p1_sto = None
    if isinstance(gaps, GapProfile):
        hp1, _ = h_p1_min(gaps)
        p1_sto = 2 * K**3 * n * math.exp(-n / (128 * hp1))
    return TheoryBounds(
        rule_adv=K * math.exp(-3 * n / (28 * hu)),
        p1_adv=K * math.exp(-3 * n / (40 * harmonic(K) * hu)),
        p1_sto=p1_sto,
    )


def bound_for(kind: str, source: RewardSource, n: int, profile: GapProfile | None) -> float | None:
    """The bound overlaid on a learner's error rate, None where none applies.

    Stochastic sources use their gap profile; other sources use the gaps of
    their expected cumulative gains.
    """
    kind = learner_kind(kind)
    if kind not in ("Rule", "P1"):
        return None
    if source.stochastic and profile is not None:
        b = theoretical_bounds(profile, source.K, n)
        return b.rule_adv if kind == "Rule" else b.p1_sto
    try:
        g = expected_hindsight_gaps(source, n)
    except NonUniqueBestArm:
        return None
    b = theoretical_bounds(g, source.K, n)
    return b.rule_adv if kind == "Rule" else b.p1_adv


@dataclass
class ErrorRateRow:
    setup: str
    learner: str
    n: int
    repetitions: int
    errors: int
    ci_low: float
    ci_high: float
    theory_bound: float | None
    seed: int
    tied: int = 0
    wall_time: float = 0.0

    @property
    def error_rate(self) -> float:
        return self.errors / self.repetitions if self.repetitions else 0.0

    @property
    def vacuous(self) -> bool | None:
        return TheoryBounds.vacuous(self.theory_bound)

    @property
    def sigma(self) -> float:
        p = self.error_rate
        return math.sqrt(p * (1 - p) / self.repetitions) if self.repetitions else 0.0


@dataclass
class ErrorRateReport:
    rows: list[ErrorRateRow] = field(default_factory=list)

    def row(self, learner: str) -> ErrorRateRow:
        kind = learner_kind(learner)
        return next(r for r in self.rows if r.learner == kind)


def resolve_workers(workers: int | None) -> int:
    env = os.environ.get("BAI_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, workers or 1)


def estimate_error(
    kind: str,
    source: RewardSource,
    n: int,
    repetitions: int,
    master_seed: int,
    *,
    setup: str = "",
    profile: GapProfile | None = None,
    workers: int = 1,
) -> ErrorRateRow:
    kind = learner_kind(kind)
    t0 = time.perf_counter()
    errors, counted, tied = count_errors(kind, source, n, repetitions, master_seed, workers)
    if counted == 0:
        raise NonUniqueBestArm("every realized reward tensor has a tied best arm")
    lo, hi = wilson_interval(errors, counted)
    return ErrorRateRow(
        setup=setup,
        learner=kind,
        n=n,
        repetitions=counted,
        errors=errors,
        ci_low=lo,
        ci_high=hi,
        theory_bound=bound_for(kind, source, n, profile),
        seed=master_seed,
        tied=tied,
        wall_time=time.perf_counter() - t0,
    )


def monte_carlo(config) -> ErrorRateReport:
    """Estimate the error rate of every configured learner on the configured source."""
    from .config import build_source

    source, profile = build_source(config)
    workers = resolve_workers(config.workers)
    report = ErrorRateReport()
    for kind in config.learners:
        report.rows.append(
            estimate_error(
                kind, source, config.n, config.repetitions, config.master_seed,
                setup=config.label, profile=profile, workers=workers,
            )
        )
    return report


def error_rates(kinds: Sequence[str], source, n, repetitions, master_seed, **kw) -> ErrorRateReport:
    return ErrorRateReport([estimate_error(k, source, n, repetitions, master_seed, **kw) for k in kinds])
