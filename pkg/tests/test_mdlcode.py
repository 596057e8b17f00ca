"""Online-code accounting, uniform closed forms, and verdict logic."""

import math

import pytest

from causalmdl.cipherlab import (
    CipherDatasetSpec,
    NoiseSpec,
    generate_cipher_dataset,
    synthetic_lines,
)
from causalmdl.corpus import TokenizeMode, make_block_schedule
from causalmdl.errors import ComputationError, ConfigError, InputError
from causalmdl.mdlcode import (
    CodedSide,
    CodeKind,
    CodelengthReport,
    DirectionVerdict,
    Verdict,
    conditional_mdl,
    direction_test,
    make_channel_factory,
    make_lm_factory,
    marginal_mdl,
    reports_to_csv,
    uniform_channel_factory,
    uniform_lm_factory,
    verdict_summary,
)
from causalmdl.seqmodel import ChannelConfig, LmConfig


def cipher_corpus(n, seed=0, p=0.05):
    lines = synthetic_lines(n, seed=seed)
    spec = CipherDatasetSpec(lines=tuple(lines), noise=NoiseSpec(p=p, rng_seed=seed),
                             mode=TokenizeMode.CHAR)
    return generate_cipher_dataset(spec)


class _FlatModel:
    """Stub pricing every token at a constant number of bits."""

    def __init__(self, bits_per_token):
        self.bits_per_token = bits_per_token

    def codelength(self, *seqs):
        return self.bits_per_token * len(seqs[-1])


def flat_lm_factory(bits_per_token, prefix_sizes):
    def factory(sequences, vocab):
        prefix_sizes.append(len(sequences))
        return _FlatModel(bits_per_token)

    return factory


def flat_channel_factory(bits_per_token, seen):
    def factory(pairs, in_vocab, out_vocab):
        seen.append((len(pairs), in_vocab, out_vocab))
        return _FlatModel(bits_per_token)

    return factory


class TestCodelengthReport:
    def test_total_kbits_scales_bits(self):
        schedule = make_block_schedule(10)
        rep = CodelengthReport(kind=CodeKind.MARGINAL_X, uniform_block_bits=500.0,
                               per_block_bits=(100.0,) * 9, total_bits=1400.0,
                               schedule=schedule)
        assert rep.total_kbits == pytest.approx(1.4, rel=1e-12)

    def test_negative_bits_rejected(self):
        schedule = make_block_schedule(10)
        with pytest.raises(ComputationError):
            CodelengthReport(kind=CodeKind.MARGINAL_X, uniform_block_bits=-1.0,
                             per_block_bits=(0.0,) * 9, total_bits=-1.0,
                             schedule=schedule)

    def test_block_count_must_match_schedule(self):
        schedule = make_block_schedule(10)
        with pytest.raises(ComputationError):
            CodelengthReport(kind=CodeKind.MARGINAL_X, uniform_block_bits=1.0,
                             per_block_bits=(1.0, 1.0), total_bits=3.0,
                             schedule=schedule)


class TestMarginalMdl:
    def test_flat_model_accounting_matches_hand_sum(self):
        corpus = cipher_corpus(200)
        schedule = make_block_schedule(200)
        seen = []
        bits = 3.25
        report = marginal_mdl(corpus.src_seqs, corpus.src_vocab, schedule,
                              flat_lm_factory(bits, seen))
        t = schedule.indices
        lens = [len(s) for s in corpus.src_seqs]
        expect_uniform = sum(lens[: t[0]]) * math.log2(corpus.src_vocab.size)
        assert report.uniform_block_bits == pytest.approx(expect_uniform, rel=1e-12)
        for j in range(1, len(t)):
            expect = bits * sum(lens[t[j - 1]: t[j]])
            assert report.per_block_bits[j - 1] == pytest.approx(expect, rel=1e-12)
        assert report.total_bits == pytest.approx(
            expect_uniform + sum(report.per_block_bits), rel=1e-12)

    def test_each_block_model_trains_on_its_prefix_only(self):
        corpus = cipher_corpus(200)
        schedule = make_block_schedule(200)
        seen = []
        marginal_mdl(corpus.src_seqs, corpus.src_vocab, schedule,
                     flat_lm_factory(1.0, seen))
        assert seen == list(schedule.indices[:-1])

    def test_uniform_factory_closed_form(self):
        corpus = cipher_corpus(300)
        schedule = make_block_schedule(300)
        report = marginal_mdl(corpus.src_seqs, corpus.src_vocab, schedule,
                              uniform_lm_factory())
        expect = sum(len(s) for s in corpus.src_seqs) * math.log2(corpus.src_vocab.size)
        assert report.total_bits == pytest.approx(expect, rel=1e-9)

    def test_trained_model_beats_uniform_code(self):
        corpus = cipher_corpus(500)
        schedule = make_block_schedule(500)
        trained = marginal_mdl(corpus.src_seqs, corpus.src_vocab, schedule,
                               make_lm_factory(LmConfig.for_mode(TokenizeMode.CHAR)))
        uniform = marginal_mdl(corpus.src_seqs, corpus.src_vocab, schedule,
                               uniform_lm_factory())
        assert trained.total_bits < uniform.total_bits

    def test_reruns_are_identical(self):
        corpus = cipher_corpus(200)
        schedule = make_block_schedule(200)
        factory = make_lm_factory(LmConfig.for_mode(TokenizeMode.CHAR))
        a = marginal_mdl(corpus.src_seqs, corpus.src_vocab, schedule, factory)
        b = marginal_mdl(corpus.src_seqs, corpus.src_vocab, schedule, factory)
        assert a == b

    def test_schedule_must_end_at_corpus_size(self):
        corpus = cipher_corpus(200)
        with pytest.raises(ConfigError):
            marginal_mdl(corpus.src_seqs, corpus.src_vocab,
                         make_block_schedule(150), uniform_lm_factory())

    def test_foreign_factory_error_becomes_computation_error(self):
        corpus = cipher_corpus(20)
        schedule = make_block_schedule(20)

        def broken(sequences, vocab):
            raise ValueError("boom")

        with pytest.raises(ComputationError):
            marginal_mdl(corpus.src_seqs, corpus.src_vocab, schedule, broken)

    def test_domain_errors_from_factory_propagate(self):
        corpus = cipher_corpus(20)
        schedule = make_block_schedule(20)

        def picky(sequences, vocab):
            raise InputError("bad prefix")

        with pytest.raises(InputError):
            marginal_mdl(corpus.src_seqs, corpus.src_vocab, schedule, picky)


class TestConditionalMdl:
    def test_flat_model_accounting_and_orientation(self):
        corpus = cipher_corpus(200)
        schedule = make_block_schedule(200)
        bits = 2.5
        seen = []
        report = conditional_mdl(corpus.pairs, corpus.src_vocab, corpus.tgt_vocab,
                                 schedule, flat_channel_factory(bits, seen),
                                 CodedSide.TGT_GIVEN_SRC)
        t = schedule.indices
        out_lens = [len(p.tgt) for p in corpus.pairs]
        expect_uniform = sum(out_lens[: t[0]]) * math.log2(corpus.tgt_vocab.size)
        assert report.kind is CodeKind.COND_Y_GIVEN_X
        assert report.uniform_block_bits == pytest.approx(expect_uniform, rel=1e-12)
        for j in range(1, len(t)):
            expect = bits * sum(out_lens[t[j - 1]: t[j]])
            assert report.per_block_bits[j - 1] == pytest.approx(expect, rel=1e-12)
        assert [s[0] for s in seen] == list(t[:-1])
        assert all(iv is corpus.src_vocab and ov is corpus.tgt_vocab
                   for _, iv, ov in seen)

    def test_src_given_tgt_codes_the_source_side(self):
        corpus = cipher_corpus(150)
        schedule = make_block_schedule(150)
        seen = []
        report = conditional_mdl(corpus.pairs, corpus.src_vocab, corpus.tgt_vocab,
                                 schedule, flat_channel_factory(1.0, seen),
                                 CodedSide.SRC_GIVEN_TGT)
        out_lens = [len(p.src) for p in corpus.pairs]
        expect_uniform = sum(out_lens[: schedule.indices[0]]) * math.log2(
            corpus.src_vocab.size)
        assert report.kind is CodeKind.COND_X_GIVEN_Y
        assert report.uniform_block_bits == pytest.approx(expect_uniform, rel=1e-12)
        assert all(iv is corpus.tgt_vocab and ov is corpus.src_vocab
                   for _, iv, ov in seen)

    def test_uniform_factory_closed_form(self):
        corpus = cipher_corpus(300)
        schedule = make_block_schedule(300)
        report = conditional_mdl(corpus.pairs, corpus.src_vocab, corpus.tgt_vocab,
                                 schedule, uniform_channel_factory())
        expect = sum(len(p.tgt) for p in corpus.pairs) * math.log2(corpus.tgt_vocab.size)
        assert report.total_bits == pytest.approx(expect, rel=1e-9)

    def test_plain_tuple_pairs_accepted(self):
        corpus = cipher_corpus(50)
        schedule = make_block_schedule(50)
        tuples = [(p.src, p.tgt) for p in corpus.pairs]
        a = conditional_mdl(tuples, corpus.src_vocab, corpus.tgt_vocab,
                            schedule, uniform_channel_factory())
        b = conditional_mdl(corpus.pairs, corpus.src_vocab, corpus.tgt_vocab,
                            schedule, uniform_channel_factory())
        assert a.total_bits == b.total_bits

    def test_schedule_must_end_at_pair_count(self):
        corpus = cipher_corpus(60)
        with pytest.raises(ConfigError):
            conditional_mdl(corpus.pairs, corpus.src_vocab, corpus.tgt_vocab,
                            make_block_schedule(50), uniform_channel_factory())


class TestDirectionVerdictTotals:
    def test_lower_causal_total_names_x_as_cause(self):
        v = DirectionVerdict.from_totals(2080.49, 2426.92)
        assert v.verdict is Verdict.X_TO_Y
        assert v.margin_kbits == pytest.approx((2426.92 - 2080.49) / 1000.0, rel=1e-12)

    def test_lower_anticausal_total_names_y_as_cause(self):
        v = DirectionVerdict.from_totals(759.11, 702.72)
        assert v.verdict is Verdict.Y_TO_X
        assert v.margin_kbits < 0

    def test_equal_totals_tie(self):
        v = DirectionVerdict.from_totals(1000.0, 1000.0)
        assert v.verdict is Verdict.TIE
        assert v.margin_kbits == 0.0

    def test_report_lookup_by_kind(self):
        corpus = cipher_corpus(100)
        schedule = make_block_schedule(100)
        verdict = direction_test(corpus, schedule, uniform_lm_factory(),
                                 uniform_channel_factory())
        assert verdict.report(CodeKind.MARGINAL_X).kind is CodeKind.MARGINAL_X
        assert len(verdict.reports) == 4

    def test_report_lookup_missing_kind_rejected(self):
        v = DirectionVerdict.from_totals(1.0, 2.0)
        with pytest.raises(InputError):
            v.report(CodeKind.MARGINAL_X)


class TestDirectionTest:
    def test_uniform_factories_always_tie_on_shared_vocab(self):
        # Both factorizations reduce to the same token-count times log2 V.
        corpus = cipher_corpus(100)
        schedule = make_block_schedule(100)
        verdict = direction_test(corpus, schedule, uniform_lm_factory(),
                                 uniform_channel_factory())
        lens_x = sum(len(p.src) for p in corpus.pairs)
        lens_y = sum(len(p.tgt) for p in corpus.pairs)
        expect_causal = lens_x * math.log2(corpus.src_vocab.size) \
            + lens_y * math.log2(corpus.tgt_vocab.size)
        assert verdict.l_causal_bits == pytest.approx(expect_causal, rel=1e-9)
        assert verdict.l_anticausal_bits == pytest.approx(expect_causal, rel=1e-9)

    def test_cipher_corpus_resolves_to_clean_side(self):
        corpus = cipher_corpus(2000, seed=3)
        schedule = make_block_schedule(2000)
        verdict = direction_test(corpus, schedule,
                                 make_lm_factory(LmConfig.for_mode(TokenizeMode.CHAR)),
                                 make_channel_factory(ChannelConfig()))
        assert verdict.verdict is Verdict.X_TO_Y
        assert verdict.margin_kbits > 0

    def test_swapping_sides_negates_the_margin_exactly(self):
        corpus = cipher_corpus(300, seed=7)
        schedule = make_block_schedule(300)
        lm = make_lm_factory(LmConfig.for_mode(TokenizeMode.CHAR))
        ch = make_channel_factory(ChannelConfig())
        forward = direction_test(corpus, schedule, lm, ch)
        backward = direction_test(corpus.swapped(), schedule, lm, ch)
        assert backward.margin_kbits == -forward.margin_kbits
        assert backward.l_causal_bits == forward.l_anticausal_bits
        assert backward.l_anticausal_bits == forward.l_causal_bits
        assert {forward.verdict, backward.verdict} == {Verdict.X_TO_Y, Verdict.Y_TO_X}


class TestReportSerialization:
    def test_csv_rows_carry_uniform_block_then_model_blocks(self, tmp_path):
        corpus = cipher_corpus(100)
        schedule = make_block_schedule(100)
        verdict = direction_test(corpus, schedule, uniform_lm_factory(),
                                 uniform_channel_factory())
        path = tmp_path / "blocks.csv"
        reports_to_csv(verdict.reports, path)
        rows = path.read_text(encoding="utf-8").strip().splitlines()
        assert rows[0] == "kind,block_index,bits"
        body = [r.split(",") for r in rows[1:]]
        assert len(body) == 4 * schedule.num_blocks
        marg_x = [r for r in body if r[0] == "marginal_x"]
        assert [int(r[1]) for r in marg_x] == list(range(1, schedule.num_blocks + 1))
        rep = verdict.report(CodeKind.MARGINAL_X)
        assert float(marg_x[0][2]) == rep.uniform_block_bits
        assert float(marg_x[3][2]) == rep.per_block_bits[2]

    def test_summary_carries_totals_verdict_and_components(self):
        corpus = cipher_corpus(100)
        schedule = make_block_schedule(100)
        verdict = direction_test(corpus, schedule, uniform_lm_factory(),
                                 uniform_channel_factory())
        summary = verdict_summary(verdict)
        assert summary["verdict"] == verdict.verdict.value
        assert summary["l_causal_bits"] == verdict.l_causal_bits
        assert summary["margin_kbits"] == verdict.margin_kbits
        assert summary["total_bits[marginal_x]"] == \
            verdict.report(CodeKind.MARGINAL_X).total_bits
