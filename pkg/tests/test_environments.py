import math

import numpy as np
import pytest

from robust_bai.core import DomainError, NonUniqueBestArm, RngStream, gaps_from_means, hindsight_gaps, stream_keys
from robust_bai.environments import (
    MatrixSource,
    bernoulli_source,
    deception_adversary,
    estimate_low_pull_arm,
    expected_hindsight_gaps,
    load_matrix_csv,
    preset,
    switch_adversary_pair,
    two_phase_adversary_pair,
)
from robust_bai.learners import play_episode


class TestPresets:
    def test_a(self):
        m = preset("A")
        assert len(m) == 20 and m[0] == 0.5 and set(m[1:]) == {0.4}

    def test_f(self):
        m = preset("F")
        assert len(m) == 20 and m[1] == 0.48 and set(m[2:]) == {0.37}

    def test_e_modes(self):
        table = gaps_from_means(preset("E"))
        assert table.K == 15
        np.testing.assert_allclose(table.gaps[1:], 0.025 * np.arange(1, 15))
        printed = preset("E", setup_e_mode="printed")
        assert printed[1] == pytest.approx(0.45)

    def test_c_modes(self):
        exact = gaps_from_means(preset("C")).gaps
        np.testing.assert_allclose(exact[1:], 0.37 ** np.arange(2, 5))
        rounded = gaps_from_means(preset("C", setup_c_gaps="rounded3")).gaps
        np.testing.assert_allclose(rounded[1:], (0.137, 0.051, 0.019))

    @pytest.mark.parametrize("s", list("ABCDEFGH"))
    def test_best_arm_is_half(self, s):
        m = preset(s)
        assert m[0] == 0.5 and max(m[1:]) < 0.5

    def test_unknown(self):
        with pytest.raises(DomainError):
            preset("Z")


class TestBernoulli:
    def test_degenerate_means(self):
        g = bernoulli_source([1.0, 0.0], 50).matrix(RngStream(0, 0))
        assert np.all(g[0] == 1) and np.all(g[1] == 0)

    def test_frequency(self):
        n = 10**5
        g = bernoulli_source([0.5, 0.2], n).matrix(RngStream(4, 4))
        assert abs(g[0].mean() - 0.5) <= 3 * math.sqrt(0.25 / n)

    def test_same_stream_same_tensor(self):
        src = bernoulli_source([0.5, 0.3, 0.7], 100)
        assert np.array_equal(src.matrix(RngStream(1, 2)), src.matrix(RngStream(1, 2)))
        assert not np.array_equal(src.matrix(RngStream(1, 2)), src.matrix(RngStream(1, 3)))

    def test_domain(self):
        with pytest.raises(DomainError):
            bernoulli_source([0.5, 1.5])


class TestSwitchAdversary:
    def test_flat_gaps_never_switch(self):
        p = gaps_from_means([0.5] + [0.4] * 4)
        sto, adv = switch_adversary_pair(p, 3, 2, 100)
        assert adv.switch_round == 100
        np.testing.assert_allclose(adv.expected_totals(100) / 100, [0.5, 0.4, 0.4, 0.4, 0.4])
        assert sto.means[2] == pytest.approx(0.55)

    def test_setup_b_switch_round(self):
        p = gaps_from_means(preset("B"))
        n = 3000
        _, adv = switch_adversary_pair(p, 5, 20, n)
        assert adv.a_i == pytest.approx(2 / 3)
        assert adv.switch_round == math.ceil(2 * n / 3)

    def test_expected_hindsight_mean_of_bar_k(self):
        p = gaps_from_means(preset("B"))
        n, bar_k, i = 3000, 10, 20
        _, adv = switch_adversary_pair(p, bar_k, i, n)
        a = adv.a_i
        d1, dk = p.min_gap, p.gaps[bar_k - 1]
        expect = a * (0.5 - dk) + (1 - a) * (0.5 + d1 / 2)
        assert adv.expected_totals(n)[bar_k - 1] / n == pytest.approx(expect, abs=1 / n)
        assert expect < 0.5

    def test_tensors_differ_only_in_bar_k_early(self):
        p = gaps_from_means(preset("D"))
        n, bar_k = 600, 4
        sto, adv = switch_adversary_pair(p, bar_k, 6, n)
        s = RngStream(5, 6)
        diff = np.argwhere(sto.matrix(s) != adv.matrix(s))
        assert len(diff) > 0
        assert set(diff[:, 0]) == {bar_k - 1}
        assert diff[:, 1].max() < adv.switch_round

    def test_overrides(self):
        p = gaps_from_means([0.5] + [0.4] * 7)
        _, adv = switch_adversary_pair(p, 2, 2, 1000, switch_round=400, pre_switch_mean=0.0, post_switch_mean=1.0)
        g = adv.matrix(RngStream(0, 0))
        assert g[1, :400].sum() == 0 and g[1, 400:].sum() == 600

    def test_domain(self):
        p = gaps_from_means([0.5, 0.4, 0.3])
        with pytest.raises(DomainError):
            switch_adversary_pair(p, 1, 2, 100)
        with pytest.raises(DomainError):
            switch_adversary_pair(p, 2, 4, 100)


class TestTwoPhaseAdversary:
    def test_flat_gaps_second_half_zero(self):
        p = gaps_from_means([0.5] + [0.4] * 5)
        adv1, adv2 = two_phase_adversary_pair(p, 3, 200)
        for src in (adv1, adv2):
            g = src.matrix(RngStream(1, 1))
            assert np.all(g[:, 100:] == 0)

    def test_expected_means_flip(self):
        p = gaps_from_means(preset("D"))
        n, bar_k = 1000, 6
        adv1, adv2 = two_phase_adversary_pair(p, bar_k, n)
        d1 = p.min_gap
        assert adv1.expected_totals(n)[bar_k - 1] == pytest.approx(n / 2 * (0.5 - d1))
        assert adv2.expected_totals(n)[bar_k - 1] == pytest.approx(n / 2 * (0.5 + d1))
        assert np.argmax(adv2.expected_totals(n)) == bar_k - 1
        assert np.argmax(adv1.expected_totals(n)) == 0

    def test_differ_only_in_bar_k_first_half(self):
        p = gaps_from_means(preset("D"))
        n, bar_k = 1000, 6
        adv1, adv2 = two_phase_adversary_pair(p, bar_k, n)
        s = RngStream(2, 2)
        g1, g2 = adv1.matrix(s), adv2.matrix(s)
        diff = np.argwhere(g1 != g2)
        assert set(diff[:, 0]) == {bar_k - 1} and diff[:, 1].max() < n // 2
        others = np.delete(g1, bar_k - 1, axis=0)
        assert np.all(others[:, n // 2:] == 0)
        assert np.all(g1[bar_k - 1, n // 2:] == pytest.approx(p.gaps[bar_k - 1] - p.min_gap))

    def test_odd_n(self):
        p = gaps_from_means([0.5, 0.4, 0.3])
        adv1, _ = two_phase_adversary_pair(p, 2, 11)
        assert adv1.half == 6


class TestDeception:
    def test_no_blackout_is_bernoulli(self):
        m = [0.6, 0.3]
        s = RngStream(3, 1)
        assert np.array_equal(deception_adversary(m, 0, 50).matrix(s), bernoulli_source(m, 50).matrix(s))

    def test_full_blackout(self):
        g = deception_adversary([0.9, 0.1], 40, 40).matrix(RngStream(0, 0))
        assert np.all(g == 0)
        with pytest.raises(NonUniqueBestArm):
            hindsight_gaps(g)

    def test_half_blackout_keeps_best(self):
        src = deception_adversary([0.9, 0.1], 500, 1000)
        keys = stream_keys(8, np.arange(200, dtype=np.uint64))
        assert np.all(src.row_sums(keys).argmax(axis=1) == 0)


class TestObliviousness:
    @pytest.mark.parametrize("kind", ["P1", "SR", "SH", "StaticUniform", "MixedP1Rule"])
    def test_replay_for_every_source_kind(self, kind):
        p = gaps_from_means(preset("D"))
        n = 300
        sources = [
            bernoulli_source(p.means, n),
            *switch_adversary_pair(p, 3, 6, n),
            *two_phase_adversary_pair(p, 3, n),
            deception_adversary(p.means, 100, n),
        ]
        s = RngStream(11, 12)
        for src in sources:
            lazy = play_episode(kind, src, n, s)
            replay = play_episode(kind, MatrixSource(src.matrix(s)), n, s)
            assert lazy.pulls == replay.pulls

    def test_row_sums_match_matrix(self):
        src = deception_adversary([0.6, 0.5, 0.2], 30, 120)
        keys = stream_keys(1, np.arange(4, dtype=np.uint64))
        sums = src.row_sums(keys)
        for b, sid in enumerate(range(4)):
            np.testing.assert_array_equal(sums[b], src.matrix(RngStream(1, sid)).sum(axis=1))

    def test_boundedness_fuzz(self):
        rng = np.random.default_rng(0)
        for j in range(1000):
            K = int(rng.integers(2, 8))
            n = int(rng.integers(K * 2, 60))
            gaps = np.sort(rng.uniform(0.01, 0.25, K - 1))
            p = gaps_from_means([0.5, *(0.5 - gaps)])
            bar_k = int(rng.integers(2, K + 1))
            i = int(rng.integers(2, K + 1))
            kind = j % 3
            if kind == 0:
                srcs = switch_adversary_pair(p, bar_k, i, n)
            elif kind == 1:
                srcs = two_phase_adversary_pair(p, bar_k, n)
            else:
                srcs = (deception_adversary(p.means, int(rng.integers(0, n + 1)), n),)
            for src in srcs:
                g = src.matrix(RngStream(j, 0))
                assert g.shape == (K, n)
                assert np.all((g >= 0) & (g <= 1))


class TestMatrixSource:
    def test_csv_roundtrip(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text("1,0,1\n0,0,1\n")
        src = load_matrix_csv(path)
        assert src.K == 2 and src.n == 3
        assert src.best_arm() == 1

    def test_domain(self):
        with pytest.raises(DomainError):
            MatrixSource([[1.5, 0], [0, 0]])


class TestHindsight:
    def test_expected_gaps(self):
        src = bernoulli_source([0.5, 0.4, 0.2], 100)
        np.testing.assert_allclose(expected_hindsight_gaps(src, 100), [0.1, 0.1, 0.3])

    def test_tied_expectation(self):
        with pytest.raises(NonUniqueBestArm):
            expected_hindsight_gaps(deception_adversary([0.5, 0.4], 10, 10), 10)


class TestLowPullArm:
    def test_static_uniform_ties_to_arm_two(self):
        src = bernoulli_source(preset("D"))
        assert estimate_low_pull_arm("StaticUniform", src, 600, 300, 100, RngStream(0, 0)) == 2

    def test_rule_counts_are_uniform(self):
        from robust_bai.learners import play_batch

        src = bernoulli_source(preset("D"))
        s = RngStream(0, 1)
        reps, phase_end, K = 400, 300, 6
        ids = [s.child(j).stream_id for j in range(reps)]
        avg = play_batch("Rule", src, 600, 0, ids, count_until=phase_end).early_counts.mean(axis=0)
        sd = math.sqrt(phase_end * (1 / K) * (1 - 1 / K) / reps)
        assert np.all(np.abs(avg - phase_end / K) <= 3 * sd)
        assert 2 <= estimate_low_pull_arm("Rule", src, 600, phase_end, 100, s) <= K

    def test_sr_on_setup_b_picks_a_low_mean_arm(self):
        means = preset("B")
        src = bernoulli_source(means)
        n = 1910
        k = estimate_low_pull_arm("SR", src, n, n // 2, 200, RngStream(1, 0))
        assert means[k - 1] == pytest.approx(0.38)

    def test_reps_minimum(self):
        with pytest.raises(DomainError):
            estimate_low_pull_arm("SR", bernoulli_source([0.5, 0.4]), 10, 5, 50, RngStream(0, 0))
