"""Fixed-budget best-arm identification under stochastic and adversarial rewards."""

from .complexity import (
    Allocation,
    ComplexityReport,
    allocation_candidates,
    class_membership,
    complexity_report,
    h_bob,
    h_p1_min,
    h_p1_of,
    h_sr,
    h_unif,
)
from .core import (
    BaiError,
    BudgetTooSmall,
    DomainError,
    GapProfile,
    HindsightGaps,
    NeverPulled,
    NonUniqueBestArm,
    ProbabilityVector,
    RngStream,
    gaps_from_means,
    harmonic,
    hindsight_gaps,
    rank_by_value,
)
from .environments import (
    bernoulli_source,
    deception_adversary,
    estimate_low_pull_arm,
    load_matrix_csv,
    preset,
    switch_adversary_pair,
    two_phase_adversary_pair,
)
from .estimators import EmpiricalMeanTally, ImportanceWeightedTally, empirical_estimate, iw_update
from .learners import (
    EpisodeLog,
    mixed_policy,
    p1_policy,
    play_batch,
    recommend_iw,
    rule_policy,
    sequential_halving,
    static_uniform,
    successive_rejects,
)

__version__ = "0.1.0"
