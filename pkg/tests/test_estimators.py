import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from robust_bai.core import DomainError, NeverPulled, ProbabilityVector
from robust_bai.estimators import EmpiricalMeanTally, ImportanceWeightedTally, empirical_estimate, iw_update


class TestImportanceWeighted:
    def test_uniform_example(self):
        t = iw_update(ImportanceWeightedTally(4), 2, 0.5, ProbabilityVector((0.25,) * 4))
        assert list(t.totals) == [0, 2.0, 0, 0]
        assert t.rounds_seen == 1

    def test_zero_reward(self):
        t0 = ImportanceWeightedTally(3)
        t = iw_update(t0, 1, 0.0, ProbabilityVector((1 / 3,) * 3))
        assert list(t.totals) == [0, 0, 0]
        assert t.rounds_seen == 1
        assert t0.rounds_seen == 0

    def test_p1_weights(self):
        probs = ProbabilityVector((6 / 11, 3 / 11, 2 / 11))
        t = iw_update(ImportanceWeightedTally(3), 3, 1.0, probs)
        assert t.totals[2] == pytest.approx(5.5, rel=1e-14)

    @pytest.mark.parametrize("reward", [-0.1, 1.5])
    def test_reward_domain(self, reward):
        with pytest.raises(DomainError):
            iw_update(ImportanceWeightedTally(2), 1, reward, ProbabilityVector((0.5, 0.5)))

    @given(st.lists(st.tuples(st.integers(1, 3), st.floats(0, 1)), max_size=30))
    def test_round_robin_with_unit_probs_matches_sums(self, pulls):
        iw = ImportanceWeightedTally(3)
        em = EmpiricalMeanTally(3)
        for arm, r in pulls:
            iw.update(arm, r, 1.0)
            em.update(arm, r)
        np.testing.assert_array_equal(iw.totals, em.reward_sums)
        assert np.all(iw.totals >= 0)

    def test_support_is_scaled_bernoulli(self):
        rng = np.random.default_rng(0)
        g = 0.7
        probs = ProbabilityVector((0.2, 0.3, 0.5))
        seen = set()
        for _ in range(200):
            arm = int(rng.choice(3, p=probs.as_array())) + 1
            t = iw_update(ImportanceWeightedTally(3), arm, g, probs)
            seen.add(round(float(t.totals[0]), 12))
        assert seen <= {0.0, round(g / 0.2, 12)}


class TestEmpirical:
    def test_scaled_estimate(self):
        t = EmpiricalMeanTally(2)
        for r in (1, 0, 1):
            t.update(1, r)
        assert empirical_estimate(t, 1, 6) == pytest.approx(4.0)
        assert t.mean(1) == pytest.approx(2 / 3)

    def test_zero(self):
        t = EmpiricalMeanTally(2)
        t.update(2, 0.0)
        assert empirical_estimate(t, 2, 10) == 0.0

    def test_never_pulled(self):
        t = EmpiricalMeanTally(2)
        with pytest.raises(NeverPulled):
            empirical_estimate(t, 1, 10)
        with pytest.raises(NeverPulled):
            t.means()

    def test_batch_matches_single_updates(self):
        rng = np.random.default_rng(1)
        arms = rng.integers(0, 4, 100)
        rewards = rng.random(100)
        a, b = EmpiricalMeanTally(4), EmpiricalMeanTally(4)
        a.add_batch(arms, rewards)
        for k, r in zip(arms, rewards):
            b.update(int(k) + 1, float(r))
        np.testing.assert_allclose(a.reward_sums, b.reward_sums)
        np.testing.assert_array_equal(a.pull_counts, b.pull_counts)
        assert a.pull_counts.sum() == a.rounds_seen == 100
        assert np.all(a.reward_sums <= a.pull_counts)
