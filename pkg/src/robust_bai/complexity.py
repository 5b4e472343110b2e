"""Complexity measures of a gap profile and the P1 allocation machinery."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .core import DomainError, GapProfile, HindsightGaps, harmonic


def _sorted_gaps(profile) -> np.ndarray:
    return np.asarray(sorted(profile.gaps) if isinstance(profile, HindsightGaps) else profile.sorted_gaps)


def h_sr(profile: GapProfile) -> float:
    g = _sorted_gaps(profile)
    k = np.arange(1, len(g) + 1)
    return float(np.max(k / g**2))


def h_unif(profile: GapProfile | HindsightGaps) -> float:
    """K over the squared smallest gap; hindsight gaps are accepted too."""
    g = _sorted_gaps(profile)
    return float(len(g) / g[0] ** 2)


def h_bob(profile: GapProfile) -> float:
    g = _sorted_gaps(profile)
    k = np.arange(1, len(g) + 1)
    return float(np.max(k / g) / g[0])


def h_sr_terms(profile) -> np.ndarray:
    g = _sorted_gaps(profile)
    return np.arange(1, len(g) + 1) / g**2


def h_bob_terms(profile) -> np.ndarray:
    g = _sorted_gaps(profile)
    return np.arange(1, len(g) + 1) / g / g[0]


@dataclass(frozen=True)
class Allocation:
    """Proportions a_1..a_K of the budget, with a_{K+1} = 0 appended.

    Valid allocations have a_1 = a_2 = 1 and are non-increasing and positive.
    """

    a: tuple[float, ...]
    family: str = "custom"

    @classmethod
    def from_proportions(cls, a: Sequence[float], family: str = "custom") -> "Allocation":
        return cls(tuple(float(x) for x in a) + (0.0,), family)

    @property
    def K(self) -> int:
        return len(self.a) - 1

    def validate(self, K: int | None = None) -> None:
        a = np.asarray(self.a)
        if K is not None and len(a) != K + 1:
            raise DomainError(f"allocation has {len(a) - 1} entries, expected {K}")
        if a[-1] != 0.0:
            raise DomainError("the appended entry a_{K+1} must be 0")
        if a[0] != 1.0 or a[1] != 1.0:
            raise DomainError("an allocation needs a_1 = a_2 = 1")
        if np.any(a[:-1] <= 0.0) or np.any(a[:-1] > 1.0):
            raise DomainError("allocation entries must lie in (0, 1]")
        if np.any(np.diff(a) > 0.0):
            raise DomainError("allocation must be non-increasing")


def _h_p1_terms(sorted_gaps: np.ndarray, a: np.ndarray, hk: float) -> np.ndarray:
    # a has length K+1; term for the arm of rank r (1-based) at index r-1
    K = len(sorted_gaps)
    i = np.arange(1, K + 1)
    var = np.cumsum(((a[:-1] - a[1:]) * i)[::-1])[::-1]
    num = var + K * a[:-1] * sorted_gaps / 24.0
    return num / (a[:-1] ** 2 * sorted_gaps**2) * hk


def h_p1_terms(profile: GapProfile, alloc: Allocation) -> np.ndarray:
    """Per-arm terms of the P1 complexity, indexed by arm (0-based)."""
    alloc.validate(profile.K)
    g = np.asarray(profile.sorted_gaps)
    by_rank = _h_p1_terms(g, np.asarray(alloc.a), harmonic(profile.K))
    return by_rank[np.asarray(profile.rank_of) - 1]


def h_p1_of(profile: GapProfile, alloc: Allocation) -> float:
    return float(np.max(h_p1_terms(profile, alloc)))


def allocation_candidates(profile: GapProfile) -> list[Allocation]:
    """Flat, 1/i, 1/sqrt(i) and gap-ratio allocations, clamped so a_1 = a_2 = 1."""
    K = profile.K
    i = np.arange(1, K + 1, dtype=float)
    g = np.asarray(profile.sorted_gaps)
    families = {
        "flat": np.ones(K),
        "inverse": 1.0 / i,
        "inverse_sqrt": 1.0 / np.sqrt(i),
        "gap_ratio": g[0] / g,
    }
    out = []
    for name, a in families.items():
        a = np.minimum(a, 1.0)
        a[:2] = 1.0
        out.append(Allocation.from_proportions(a, name))
    return out


def _refine(g: np.ndarray, a: np.ndarray, hk: float, sweeps: int) -> np.ndarray:
    # coordinate descent on a_3..a_K, each coordinate kept between its neighbours
    a = a.copy()
    K = len(g)
    best = float(np.max(_h_p1_terms(g, a, hk)))
    for _ in range(sweeps):
        improved = False
        for j in range(2, K):
            lo, hi = a[j + 1], a[j - 1]
            if hi - lo <= 1e-12:
                continue

            def f(x):
                a[j] = x
                return float(np.max(_h_p1_terms(g, a, hk)))

            old = a[j]
            res = minimize_scalar(f, bounds=(max(lo, 1e-9), hi), method="bounded", options={"xatol": 1e-6})
            if res.fun < best * (1 - 1e-12):
                a[j], best, improved = res.x, float(res.fun), True
            else:
                a[j] = old
        if not improved:
            break
    return a


def h_p1_min(profile: GapProfile, refine: bool = True, sweeps: int = 3) -> tuple[float, Allocation]:
    """Smallest P1 complexity over the candidate families, optionally refined."""
    hk = harmonic(profile.K)
    g = np.asarray(profile.sorted_gaps)
    scored = [(h_p1_of(profile, c), c) for c in allocation_candidates(profile)]
    best_val, best = min(scored, key=lambda vc: vc[0])
    if refine and profile.K > 2:
        a = _refine(g, np.asarray(best.a), hk, sweeps)
        val = float(np.max(_h_p1_terms(g, a, hk)))
        if val < best_val:
            a[-1] = 0.0
            best_val, best = val, Allocation(tuple(a.tolist()), best.family + "+refined")
    return best_val, best


@dataclass(frozen=True)
class ComplexityReport:
    h_sr: float
    h_bob: float
    h_unif: float
    h_p1: float
    argmin_allocation: Allocation
    h1: float
    terms: dict = field(default_factory=dict)


def complexity_report(profile: GapProfile, refine: bool = True) -> ComplexityReport:
    hp1, alloc = h_p1_min(profile, refine=refine)
    return ComplexityReport(
        h_sr=h_sr(profile),
        h_bob=h_bob(profile),
        h_unif=h_unif(profile),
        h_p1=hp1,
        argmin_allocation=alloc,
        h1=profile.h1,
        terms={
            "h_sr": h_sr_terms(profile),
            "h_bob": h_bob_terms(profile),
            "h_p1": h_p1_terms(profile, alloc),
        },
    )


def class_membership(candidate_gaps: Sequence[float], reference: GapProfile, c: float) -> bool:
    """Whether ``candidate_gaps`` lies in the class of ``reference`` with factor ``c``.

    Every arm must be within a factor ``c`` of its reference gap, except at most
    one arm, which must instead be within a factor ``c`` of the smallest
    reference gap.
    """
    if c < 1:
        raise DomainError("c must be at least 1")
    cand = np.asarray(candidate_gaps, dtype=float)
    ref = np.asarray(reference.gaps)
    if cand.shape != ref.shape:
        raise DomainError("candidate and reference must have the same number of arms")
    ordinary = (ref / c <= cand) & (cand <= c * ref)
    failing = np.flatnonzero(~ordinary)
    if len(failing) == 0:
        return True
    if len(failing) > 1:
        return False
    d1 = reference.min_gap
    x = cand[failing[0]]
    return bool(d1 / c <= x <= c * d1)


def round_half_away(x: float) -> int:
    """Round to the nearest integer, halves away from zero.

    The value is first cut to 12 significant digits so that binary noise such
    as 6 / (0.5 - 0.42)**2 = 937.4999... rounds like the exact decimal 937.5.
    """
    x = float(f"{x:.12g}")
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)
