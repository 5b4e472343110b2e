import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robust_bai.core import (
    DomainError,
    NonUniqueBestArm,
    ProbabilityVector,
    RngStream,
    TAG_LEARNER,
    TAG_REWARD,
    cell_uniforms,
    gaps_from_means,
    harmonic,
    hindsight_gaps,
    rank_by_value,
    stream_keys,
)


def unique_max_means(min_size=2, max_size=12):
    return st.lists(st.floats(0, 1, allow_nan=False), min_size=min_size, max_size=max_size).filter(
        lambda m: m.count(max(m)) == 1
    )


class TestGapsFromMeans:
    def test_small_example(self):
        p = gaps_from_means([0.5, 0.4, 0.3])
        assert p.gaps == pytest.approx((0.1, 0.1, 0.2))
        assert p.sorted_gaps == pytest.approx((0.1, 0.1, 0.2))
        assert p.best_arm == 1

    def test_setup_a_gaps_are_flat(self):
        p = gaps_from_means([0.5] + [0.4] * 19)
        assert p.gaps == pytest.approx((0.1,) * 20)

    def test_tied_best(self):
        with pytest.raises(NonUniqueBestArm):
            gaps_from_means([0.5, 0.5, 0.3])

    @pytest.mark.parametrize("means", [[0.5], [0.5, 1.2], [-0.1, 0.3]])
    def test_domain(self, means):
        with pytest.raises(DomainError):
            gaps_from_means(means)

    def test_ranks_ties_by_index(self):
        p = gaps_from_means([0.3, 0.5, 0.3, 0.4])
        assert p.rank_of == (3, 1, 4, 2)

    @given(unique_max_means())
    def test_definition_and_invariants(self, means):
        p = gaps_from_means(means)
        K = len(means)
        for k in range(K):
            other = max(means[i] for i in range(K) if i != k)
            assert p.gaps[k] == pytest.approx(abs(other - means[k]), abs=1e-15)
        assert p.sorted_gaps[0] == p.sorted_gaps[1]
        assert sorted(p.rank_of) == list(range(1, K + 1))
        assert list(p.sorted_gaps) == sorted(p.gaps)

    @given(unique_max_means(), st.randoms())
    def test_relabeling_permutes_gaps(self, means, rnd):
        perm = list(range(len(means)))
        rnd.shuffle(perm)
        p = gaps_from_means(means)
        q = gaps_from_means([means[i] for i in perm])
        assert q.gaps == tuple(p.gaps[i] for i in perm)


class TestHindsightGaps:
    def test_two_arms(self):
        h = hindsight_gaps([[1, 1], [0, 0]])
        assert h.cumulative_gains == (2, 0)
        assert h.gaps == (1, 1)
        assert h.best_arm == 1

    def test_three_arms(self):
        h = hindsight_gaps([[1, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0]])
        assert h.cumulative_gains == (2, 1, 0)
        assert h.gaps == pytest.approx((0.25, 0.25, 0.5))

    def test_tied_rows(self):
        with pytest.raises(NonUniqueBestArm):
            hindsight_gaps([[1, 0], [0, 1], [0, 0]])

    @given(unique_max_means(), st.integers(1, 20))
    def test_constant_rows_recover_gaps(self, means, n):
        h = hindsight_gaps(np.repeat(np.asarray(means)[:, None], n, axis=1))
        p = gaps_from_means(means)
        assert h.best_arm == p.best_arm
        np.testing.assert_allclose(h.gaps, p.gaps, atol=1e-12)


class TestHarmonic:
    def test_values(self):
        assert harmonic(1) == 1.0
        assert harmonic(3) == pytest.approx(11 / 6, rel=1e-15)

    def test_zero(self):
        with pytest.raises(DomainError):
            harmonic(0)

    def test_log_bound(self):
        K = np.arange(1, 10**6 + 1)
        H = np.cumsum(1.0 / K)
        assert np.all(H <= np.log(K) + 1)

    @given(st.integers(2, 5000))
    def test_increments(self, K):
        assert harmonic(K) - harmonic(K - 1) == pytest.approx(1 / K, rel=1e-9)


class TestRankByValue:
    @pytest.mark.parametrize(
        "values, ranks",
        [((0.0, 0.0, 0.0), (1, 2, 3)), ((0.2, 0.9, 0.5), (3, 1, 2)), ((1.0, 1.0, 0.5), (1, 2, 3))],
    )
    def test_examples(self, values, ranks):
        assert tuple(rank_by_value(values)) == ranks

    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=20))
    def test_inverse_is_identity(self, values):
        r = rank_by_value(values)
        order = np.empty_like(r)
        order[r - 1] = np.arange(len(values))
        assert np.array_equal(r[order], np.arange(1, len(values) + 1))
        v = np.asarray(values)
        assert np.all(np.diff(v[order]) <= 0)


class TestProbabilityVector:
    def test_valid(self):
        p = ProbabilityVector((0.25, 0.75))
        assert p[2] == 0.75

    @pytest.mark.parametrize("probs", [(0.0, 1.0), (0.5, 0.6), (-0.1, 1.1)])
    def test_invalid(self, probs):
        with pytest.raises(DomainError):
            ProbabilityVector(probs)


class TestRngStream:
    def test_same_stream_same_draws(self):
        a = RngStream(5, 9).uniforms(TAG_REWARD, np.arange(4)[:, None], np.arange(1, 50))
        b = RngStream(5, 9).uniforms(TAG_REWARD, np.arange(4)[:, None], np.arange(1, 50))
        assert np.array_equal(a, b)

    def test_streams_and_tags_differ(self):
        t = np.arange(1, 1000)
        a = RngStream(5, 9).uniforms(TAG_REWARD, 0, t)
        assert not np.array_equal(a, RngStream(5, 10).uniforms(TAG_REWARD, 0, t))
        assert not np.array_equal(a, RngStream(6, 9).uniforms(TAG_REWARD, 0, t))
        assert not np.array_equal(a, RngStream(5, 9).uniforms(TAG_LEARNER, 0, t))

    def test_uniform_moments_and_independence(self):
        keys = stream_keys(3, np.arange(200, dtype=np.uint64))
        u = cell_uniforms(keys[:, None], TAG_REWARD, 0, np.arange(1, 1001)[None, :])
        assert np.all((u >= 0) & (u < 1))
        assert abs(u.mean() - 0.5) < 4 * math.sqrt(1 / 12 / u.size)
        assert abs(u.var() - 1 / 12) < 0.002
        # neighbouring streams and neighbouring rounds are uncorrelated
        assert abs(np.corrcoef(u[:-1].ravel(), u[1:].ravel())[0, 1]) < 0.01
        assert abs(np.corrcoef(u[:, :-1].ravel(), u[:, 1:].ravel())[0, 1]) < 0.01

    def test_children_are_distinct(self):
        s = RngStream(1, 2)
        ids = {s.child(j).stream_id for j in range(1000)}
        assert len(ids) == 1000
        assert s.child(3) == s.child(3)

    def test_range_checked(self):
        with pytest.raises(DomainError):
            RngStream(-1, 0)
        with pytest.raises(DomainError):
            RngStream(0, 2**64)

    @settings(max_examples=30)
    @given(st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1))
    def test_batch_equals_single(self, seed, sid):
        many = stream_keys(seed, np.array([sid, 1, 2], dtype=np.uint64))
        assert many[0] == RngStream(seed, sid).key[0]
