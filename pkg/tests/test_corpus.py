from __future__ import annotations

import json
import math
import random

import pytest

from causalmdl.corpus import (
    DEFAULT_FRACTIONS,
    BlockSchedule,
    DirectionLabel,
    ParallelCorpus,
    SequencePair,
    TokenizeMode,
    TokenSeq,
    Vocabulary,
    detokenize,
    load_parallel_jsonl,
    make_block_schedule,
    reserved_symbols,
    save_parallel_jsonl,
    split,
    tokenize,
)
from causalmdl.errors import ConfigError, InputError


def tiny_corpus(texts_src, texts_tgt, mode=TokenizeMode.CHAR):
    src_lists = [tokenize(t, mode) for t in texts_src]
    tgt_lists = [tokenize(t, mode) for t in texts_tgt]
    pad, mask = reserved_symbols(mode)
    sv = Vocabulary((s for syms in src_lists for s in syms), pad, mask)
    tv = Vocabulary((s for syms in tgt_lists for s in syms), pad, mask)
    pairs = tuple(
        SequencePair(sv.encode(s, raw=rs), tv.encode(t, raw=rt), DirectionLabel.X_TO_Y)
        for s, t, rs, rt in zip(src_lists, tgt_lists, texts_src, texts_tgt)
    )
    return ParallelCorpus(pairs=pairs, direction=DirectionLabel.X_TO_Y,
                          src_vocab=sv, tgt_vocab=tv, name="tiny",
                          src_mode=mode, tgt_mode=mode)


class TestTokenize:
    def test_char_mode_splits_codepoints(self):
        assert tokenize("ab c", TokenizeMode.CHAR) == ["a", "b", " ", "c"]

    def test_word_mode_splits_whitespace(self):
        assert tokenize(" a  bc ", TokenizeMode.WORD) == ["a", "bc"]

    def test_round_trip(self):
        for mode in TokenizeMode:
            text = "the cat sat"
            assert detokenize(tokenize(text, mode), mode) == text

    def test_reserved_symbols_single_codepoint_in_char_mode(self):
        pad, mask = reserved_symbols(TokenizeMode.CHAR)
        assert len(pad) == 1 and len(mask) == 1
        assert pad != mask


class TestVocabulary:
    def test_reserved_ids(self):
        v = Vocabulary("abc")
        assert v.PAD_ID == 0 and v.MASK_ID == 1
        assert v.id_to_symbol(0) == v.pad_symbol
        assert v.id_to_symbol(1) == v.mask_symbol
        assert v.size == 5

    def test_first_occurrence_order(self):
        v = Vocabulary(["b", "a", "b", "c"], pad_symbol="<p>", mask_symbol="<m>")
        assert v.decode([2, 3, 4]) == ["b", "a", "c"]

    def test_encode_decode_round_trip(self):
        v = Vocabulary("abcdef")
        seq = v.encode(list("fade"), raw="fade")
        assert isinstance(seq, TokenSeq)
        assert v.decode(seq) == list("fade")
        assert seq.raw == "fade"

    def test_oov_symbol_rejected(self):
        v = Vocabulary("ab")
        with pytest.raises(InputError):
            v.encode(["z"])

    def test_bad_id_rejected(self):
        v = Vocabulary("ab")
        with pytest.raises(InputError):
            v.id_to_symbol(v.size)

    def test_pad_mask_collision_rejected(self):
        with pytest.raises(ConfigError):
            Vocabulary("ab", pad_symbol="#", mask_symbol="#")

    def test_equality_by_symbol_table(self):
        assert Vocabulary("abc") == Vocabulary("abc")
        assert Vocabulary("abc") != Vocabulary("acb")


class TestParallelCorpus:
    def test_rejects_empty(self):
        with pytest.raises(InputError):
            tiny_corpus([], [])

    def test_rejects_empty_side(self):
        v = Vocabulary("ab")
        with pytest.raises(InputError):
            ParallelCorpus(
                pairs=(SequencePair(v.encode(["a"]), TokenSeq(())),),
                direction=DirectionLabel.X_TO_Y, src_vocab=v, tgt_vocab=v)

    def test_take_subsets_pairs_and_shares_vocab(self):
        corp = tiny_corpus(["ab", "cd", "ef"], ["xy", "zw", "uv"])
        sub = corp.take([2, 0])
        assert len(sub) == 2
        assert sub.pairs[0] is corp.pairs[2]
        assert sub.src_vocab is corp.src_vocab

    def test_swapped_is_involution(self):
        corp = tiny_corpus(["ab"], ["xy"])
        back = corp.swapped().swapped()
        assert back.pairs[0].src.tokens == corp.pairs[0].src.tokens
        assert back.direction == corp.direction

    def test_swapped_flips_direction_and_roles(self):
        corp = tiny_corpus(["ab"], ["xy"])
        sw = corp.swapped()
        assert sw.direction == DirectionLabel.Y_TO_X
        assert sw.src_vocab == corp.tgt_vocab
        assert sw.pairs[0].src.tokens == corp.pairs[0].tgt.tokens


class TestBlockSchedule:
    def test_frozen_10000(self):
        sched = make_block_schedule(10000)
        assert sched.indices == (10, 30, 70, 150, 310, 630, 1255, 2505, 5005, 10000)

    def test_frozen_1000(self):
        sched = make_block_schedule(1000)
        assert sched.indices == (1, 3, 7, 15, 31, 63, 126, 251, 501, 1000)

    def test_frozen_minimum_n(self):
        assert make_block_schedule(10).indices == tuple(range(1, 11))

    @pytest.mark.parametrize("n", [10, 1000, 10000, 100000])
    def test_invariants(self, n):
        sched = make_block_schedule(n)
        t = sched.indices
        assert len(t) == len(DEFAULT_FRACTIONS)
        assert t[-1] == n
        assert t[0] >= 1
        assert all(a < b for a, b in zip(t, t[1:]))
        assert all(s >= 1 for s in sched.block_sizes())
        assert sum(sched.block_sizes()) == n
        # Early indices track the nominal percentages when not clamped.
        for frac, idx in zip(DEFAULT_FRACTIONS[:3], t[:3]):
            assert idx >= max(1, math.floor(frac * n / 100.0 + 0.5))

    def test_too_small_n_rejected(self):
        with pytest.raises(ConfigError):
            make_block_schedule(9)

    def test_bad_fractions_rejected(self):
        with pytest.raises(ConfigError):
            make_block_schedule(100, fractions=(0.0, 50.0))
        with pytest.raises(ConfigError):
            make_block_schedule(100, fractions=(50.0,))

    def test_indices_must_increase(self):
        with pytest.raises(ConfigError):
            BlockSchedule(indices=(5, 5, 10))
        with pytest.raises(ConfigError):
            BlockSchedule(indices=(0, 10))

    def test_block_sizes_differences(self):
        sched = BlockSchedule(indices=(2, 5, 9))
        assert sched.block_sizes() == [2, 3, 4]
        assert sched.n == 9
        assert sched.num_blocks == 3


class TestSplit:
    def test_partition_is_disjoint_and_complete(self):
        n = 30
        corp = tiny_corpus([f"s{i}" for i in range(n)], [f"t{i}" for i in range(n)],
                           mode=TokenizeMode.WORD)
        parts = split(corp, test_n=5, valid_n=4, seed=3)
        ids = [p.src.raw for p in parts.train.pairs]
        ids += [p.src.raw for p in parts.valid.pairs]
        ids += [p.src.raw for p in parts.test.pairs]
        assert sorted(ids) == sorted(f"s{i}" for i in range(n))
        assert len(parts.test) == 5 and len(parts.valid) == 4

    def test_deterministic_per_seed(self):
        corp = tiny_corpus([f"s{i}" for i in range(20)], [f"t{i}" for i in range(20)],
                           mode=TokenizeMode.WORD)
        a = split(corp, test_n=5, valid_n=0, seed=11)
        b = split(corp, test_n=5, valid_n=0, seed=11)
        c = split(corp, test_n=5, valid_n=0, seed=12)
        assert [p.src.raw for p in a.test.pairs] == [p.src.raw for p in b.test.pairs]
        assert [p.src.raw for p in a.test.pairs] != [p.src.raw for p in c.test.pairs]

    def test_zero_sized_parts_are_none(self):
        corp = tiny_corpus(["a", "b"], ["x", "y"])
        parts = split(corp, test_n=0, valid_n=0, seed=0)
        assert parts.valid is None and parts.test is None
        assert len(parts.train) == 2

    def test_oversized_split_rejected(self):
        corp = tiny_corpus(["a", "b"], ["x", "y"])
        with pytest.raises(ConfigError):
            split(corp, test_n=1, valid_n=1, seed=0)


class TestJsonlRoundTrip:
    def test_round_trip_preserves_texts_and_direction(self, tmp_path):
        corp = tiny_corpus(["the cat", "a dog"], ["gur png", "n qbt"])
        path = tmp_path / "corpus.jsonl"
        save_parallel_jsonl(corp, path)
        back = load_parallel_jsonl(path)
        assert len(back) == 2
        assert back.direction == DirectionLabel.X_TO_Y
        assert [p.src.raw for p in back.pairs] == ["the cat", "a dog"]
        assert [p.tgt.raw for p in back.pairs] == ["gur png", "n qbt"]
        assert [back.src_vocab.decode(p.src) for p in back.pairs] == [
            corp.src_vocab.decode(p.src) for p in corp.pairs]

    def test_word_mode_round_trip(self, tmp_path):
        corp = tiny_corpus(["the cat sat"], ["gur png fng"], mode=TokenizeMode.WORD)
        path = tmp_path / "corpus.jsonl"
        save_parallel_jsonl(corp, path)
        back = load_parallel_jsonl(path, src_mode=TokenizeMode.WORD,
                                   tgt_mode=TokenizeMode.WORD)
        assert back.src_vocab.decode(back.pairs[0].src) == ["the", "cat", "sat"]

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            load_parallel_jsonl(tmp_path / "nope.jsonl")

    def test_malformed_json_names_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"src": "a", "tgt": "b"}\nnot json\n', encoding="utf-8")
        with pytest.raises(InputError, match=":2"):
            load_parallel_jsonl(path)

    def test_missing_fields_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"src": "a"}\n', encoding="utf-8")
        with pytest.raises(InputError):
            load_parallel_jsonl(path)

    def test_empty_text_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps({"src": "", "tgt": "b"}) + "\n", encoding="utf-8")
        with pytest.raises(InputError):
            load_parallel_jsonl(path)

    def test_bad_direction_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps({"src": "a", "tgt": "b", "direction": "sideways"}) + "\n",
                        encoding="utf-8")
        with pytest.raises(InputError):
            load_parallel_jsonl(path)

    def test_mixed_directions_leave_corpus_unknown(self, tmp_path):
        path = tmp_path / "mixed.jsonl"
        recs = [
            {"src": "a", "tgt": "b", "direction": "x_to_y"},
            {"src": "c", "tgt": "d", "direction": "y_to_x"},
        ]
        path.write_text("".join(json.dumps(r) + "\n" for r in recs), encoding="utf-8")
        corp = load_parallel_jsonl(path)
        assert corp.direction == DirectionLabel.UNKNOWN
        assert corp.pairs[0].direction == DirectionLabel.X_TO_Y
        assert corp.pairs[1].direction == DirectionLabel.Y_TO_X

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "gaps.jsonl"
        path.write_text('\n{"src": "a", "tgt": "b"}\n\n', encoding="utf-8")
        assert len(load_parallel_jsonl(path)) == 1

    def test_save_is_deterministic(self, tmp_path):
        corp = tiny_corpus(["ab", "cd"], ["xy", "zw"])
        p1, p2 = tmp_path / "one.jsonl", tmp_path / "two.jsonl"
        save_parallel_jsonl(corp, p1)
        save_parallel_jsonl(corp, p2)
        assert p1.read_bytes() == p2.read_bytes()
