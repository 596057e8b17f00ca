from __future__ import annotations

import math
import random
import sys

import pytest
import scipy.special
import scipy.stats

from causalmdl.errors import InputError
from causalmdl.evalstats import (
    SummaryStats,
    char_accuracy,
    corpus_bleu,
    corpus_char_accuracy,
    regularized_incomplete_beta,
    sign_aggregate,
    student_t_cdf,
    student_t_sf,
    welch_t_test,
)
from causalmdl.evalstats import TestResult as WelchTestResult

# Two-group summaries used throughout: (n, mean, std) per group, plus the
# externally reported p-value window each pair has to land in.
SSL_GROUPS = (SummaryStats(55, 0.04, 4.23), SummaryStats(50, 1.70, 2.05))
DA_GROUPS = (SummaryStats(65, 0.79, 1.97), SummaryStats(61, 1.74, 2.11))


class TestIncompleteBeta:
    def test_matches_scipy_on_grid(self):
        rng = random.Random(7)
        for _ in range(400):
            a = rng.uniform(0.1, 50.0)
            b = rng.uniform(0.1, 50.0)
            x = rng.random()
            ours = regularized_incomplete_beta(a, b, x)
            ref = scipy.special.betainc(a, b, x)
            assert ours == pytest.approx(ref, abs=1e-12, rel=1e-10)

    def test_boundary_values(self):
        assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0

    def test_rejects_bad_arguments(self):
        with pytest.raises(InputError):
            regularized_incomplete_beta(0.0, 1.0, 0.5)
        with pytest.raises(InputError):
            regularized_incomplete_beta(1.0, -1.0, 0.5)
        with pytest.raises(InputError):
            regularized_incomplete_beta(1.0, 1.0, 1.5)


class TestStudentT:
    def test_cdf_matches_scipy(self):
        rng = random.Random(13)
        for _ in range(300):
            t = rng.uniform(-8.0, 8.0)
            df = rng.uniform(1.0, 200.0)
            assert student_t_cdf(t, df) == pytest.approx(
                scipy.stats.t.cdf(t, df), abs=1e-12, rel=1e-10
            )

    def test_sf_symmetry(self):
        for t in (0.0, 0.3, 1.7, 4.2):
            for df in (1.0, 3.5, 30.0):
                assert student_t_sf(t, df) + student_t_sf(-t, df) == pytest.approx(1.0, abs=1e-12)

    def test_normal_limit(self):
        # At df = 1e4 the t CDF is within 1e-3 of the standard normal CDF.
        for t in (-2.5, -1.0, 0.0, 0.5, 1.96, 3.0):
            normal = 0.5 * math.erfc(-t / math.sqrt(2.0))
            assert abs(student_t_cdf(t, 1e4) - normal) < 1e-3

    def test_infinite_t(self):
        assert student_t_sf(math.inf, 5.0) == 0.0
        assert student_t_sf(-math.inf, 5.0) == 1.0

    def test_rejects_nonpositive_df(self):
        with pytest.raises(InputError):
            student_t_sf(1.0, 0.0)


class TestWelch:
    def test_ssl_groups_p_value(self):
        res = welch_t_test(*SSL_GROUPS)
        assert res.p_two_sided == pytest.approx(0.011, abs=0.002)
        assert res.t_statistic > 0

    def test_da_groups_p_value(self):
        res = welch_t_test(*DA_GROUPS)
        assert 0.010 <= res.p_two_sided <= 0.030

    def test_matches_scipy_from_stats(self):
        rng = random.Random(29)
        for _ in range(200):
            a = SummaryStats(rng.randint(2, 80), rng.uniform(-5, 5), rng.uniform(0.1, 6))
            b = SummaryStats(rng.randint(2, 80), rng.uniform(-5, 5), rng.uniform(0.1, 6))
            ours = welch_t_test(a, b)
            ref_t, ref_p = scipy.stats.ttest_ind_from_stats(
                b.mean, b.std, b.n, a.mean, a.std, a.n, equal_var=False
            )
            assert ours.t_statistic == pytest.approx(ref_t, abs=1e-10, rel=1e-10)
            assert ours.p_two_sided == pytest.approx(ref_p, abs=1e-10, rel=1e-8)

    def test_antisymmetric_in_group_order(self):
        a, b = SSL_GROUPS
        fwd = welch_t_test(a, b)
        rev = welch_t_test(b, a)
        assert fwd.t_statistic == pytest.approx(-rev.t_statistic, abs=0.0)
        assert fwd.p_two_sided == pytest.approx(rev.p_two_sided, abs=0.0)
        assert fwd.df == pytest.approx(rev.df, abs=0.0)

    def test_df_bounds(self):
        rng = random.Random(31)
        for _ in range(200):
            a = SummaryStats(rng.randint(2, 60), rng.uniform(-3, 3), rng.uniform(0.05, 4))
            b = SummaryStats(rng.randint(2, 60), rng.uniform(-3, 3), rng.uniform(0.05, 4))
            res = welch_t_test(a, b)
            assert min(a.n, b.n) - 1 <= res.df + 1e-9
            assert res.df <= a.n + b.n - 2 + 1e-9

    def test_larger_gap_smaller_p(self):
        base = SummaryStats(30, 0.0, 1.0)
        p_by_gap = [
            welch_t_test(base, SummaryStats(30, gap, 1.0)).p_two_sided
            for gap in (0.2, 0.5, 1.0, 2.0)
        ]
        assert all(earlier > later for earlier, later in zip(p_by_gap, p_by_gap[1:]))

    def test_degenerate_equal_constant_groups(self):
        res = welch_t_test(SummaryStats(5, 2.0, 0.0), SummaryStats(7, 2.0, 0.0))
        assert res == WelchTestResult(t_statistic=0.0, df=10.0, p_two_sided=1.0)

    def test_degenerate_separated_constant_groups(self):
        res = welch_t_test(SummaryStats(5, 1.0, 0.0), SummaryStats(7, 2.0, 0.0))
        assert res.t_statistic == math.inf
        assert res.p_two_sided == sys.float_info.min

    def test_p_never_exceeds_one(self):
        res = welch_t_test(SummaryStats(4, 0.0, 1.0), SummaryStats(4, 0.0, 1.0))
        assert res.t_statistic == 0.0
        assert res.p_two_sided == 1.0


class TestSummaryStats:
    def test_from_values_uses_sample_std(self):
        stats = SummaryStats.from_values([1.0, 2.0, 3.0, 4.0])
        assert stats.n == 4
        assert stats.mean == pytest.approx(2.5)
        assert stats.std == pytest.approx(math.sqrt(5.0 / 3.0))

    def test_rejects_small_groups(self):
        with pytest.raises(InputError):
            SummaryStats(1, 0.0, 1.0)
        with pytest.raises(InputError):
            SummaryStats.from_values([3.0])

    def test_rejects_negative_std(self):
        with pytest.raises(InputError):
            SummaryStats(5, 0.0, -0.1)


class TestSignAggregate:
    def test_counts_wins_and_ties(self):
        pairs = [(1.0, 2.0), (3.0, 1.0), (2.0, 2.0), (0.0, 5.0)]
        assert sign_aggregate(pairs) == (1, 2, 1)

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            sign_aggregate([])


class TestCharAccuracy:
    def test_counts_positionwise_matches(self):
        assert char_accuracy("abc", "abd") == pytest.approx(2.0 / 3.0)

    def test_long_hypothesis_penalized(self):
        assert char_accuracy("abcd", "ab") == pytest.approx(0.5)

    def test_short_hypothesis_penalized(self):
        assert char_accuracy("ab", "abcd") == pytest.approx(0.5)

    def test_both_empty_is_perfect(self):
        assert char_accuracy("", "") == 1.0

    def test_corpus_micro_average(self):
        hyps = ["ab", "xyz"]
        refs = ["ab", "xy"]
        # 2 hits / 2 positions and 2 hits / 3 positions pooled: 4 / 5.
        assert corpus_char_accuracy(hyps, refs) == pytest.approx(0.8)

    def test_corpus_length_mismatch(self):
        with pytest.raises(InputError):
            corpus_char_accuracy(["a"], ["a", "b"])
        with pytest.raises(InputError):
            corpus_char_accuracy([], [])


class TestCorpusBleu:
    def test_identical_corpora_score_100(self):
        lines = ["the cat sat on the mat", "a stitch in time saves nine"]
        assert corpus_bleu(lines, lines) == pytest.approx(100.0, abs=1e-9)

    def test_disjoint_unigrams_score_0(self):
        assert corpus_bleu(["a b c"], ["x y z"]) == 0.0

    def test_golden_short_hypothesis(self):
        # p1 = 3/3, smoothed higher orders all 1, brevity penalty e^(1 - 4/3).
        got = corpus_bleu(["the cat sat"], ["the cat sat down"])
        assert got == pytest.approx(100.0 * math.exp(-1.0 / 3.0), abs=1e-9)
        assert got == pytest.approx(71.65313105737893, abs=1e-9)

    def test_long_hypothesis_no_brevity_penalty(self):
        full = corpus_bleu(["the cat sat down"], ["the cat sat"])
        # Same n-gram overlap as the short-hypothesis case but BP = 1; the
        # loss is purely from precision denominators.
        assert full > 0.0
        p1, p2, p3, p4 = 3 / 4, (2 + 1) / (3 + 1), (1 + 1) / (2 + 1), (0 + 1) / (1 + 1)
        assert full == pytest.approx(100.0 * (p1 * p2 * p3 * p4) ** 0.25, abs=1e-9)

    def test_score_in_range(self):
        rng = random.Random(41)
        vocab = list("abcdef")
        for _ in range(50):
            hyps = [" ".join(rng.choices(vocab, k=rng.randint(1, 8))) for _ in range(5)]
            refs = [" ".join(rng.choices(vocab, k=rng.randint(1, 8))) for _ in range(5)]
            score = corpus_bleu(hyps, refs)
            assert 0.0 <= score <= 100.0

    def test_relabel_invariance(self):
        # A bijective renaming of the token alphabet leaves the score alone.
        rng = random.Random(43)
        vocab = list("abcdefgh")
        table = {tok: f"T{i}" for i, tok in enumerate(vocab)}
        hyps = [" ".join(rng.choices(vocab, k=rng.randint(2, 9))) for _ in range(8)]
        refs = [" ".join(rng.choices(vocab, k=rng.randint(2, 9))) for _ in range(8)]

        def relabel(line: str) -> str:
            return " ".join(table[tok] for tok in line.split())

        before = corpus_bleu(hyps, refs)
        after = corpus_bleu([relabel(h) for h in hyps], [relabel(r) for r in refs])
        assert after == pytest.approx(before, abs=1e-12)

    def test_token_lists_and_strings_agree(self):
        hyps = ["the cat sat"]
        refs = ["the cat sat down"]
        assert corpus_bleu(hyps, refs) == corpus_bleu(
            [h.split() for h in hyps], [r.split() for r in refs]
        )

    def test_max_n_one_is_unigram_precision(self):
        score = corpus_bleu(["a b c d"], ["a b x y"], max_n=1)
        assert score == pytest.approx(100.0 * 0.5, abs=1e-9)

    def test_empty_hypothesis_line_scores_zero_overall(self):
        assert corpus_bleu([""], ["a b"]) == 0.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(InputError):
            corpus_bleu(["a"], ["a", "b"])
        with pytest.raises(InputError):
            corpus_bleu([], [])
        with pytest.raises(InputError):
            corpus_bleu(["a"], ["a"], max_n=0)
