"""Prequential online-code MDL and the causal-direction verdict.

A sequence dataset is coded in blocks: the first block costs the uniform
code length(x_i) * log2(V) per sequence, and every later block is coded by
a model retrained from scratch on all preceding blocks. Comparing
MDL(X) + MDL(Y|X) against MDL(Y) + MDL(X|Y) yields the direction verdict:
the factorization aligned with the true mechanism compresses better.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .corpus import BlockSchedule, ParallelCorpus, TokenSeq, Vocabulary
from .errors import CausalMdlError, ComputationError, ConfigError, InputError
from .seqmodel import (
    ChannelConfig,
    LmConfig,
    train_channel,
    train_lm,
    uniform_channel,
    uniform_lm,
)

KBIT = 1000.0  # bits per kbit in every report


class CodeKind(enum.Enum):
    MARGINAL_X = "marginal_x"
    MARGINAL_Y = "marginal_y"
    COND_Y_GIVEN_X = "cond_y_given_x"
    COND_X_GIVEN_Y = "cond_x_given_y"


class CodedSide(enum.Enum):
    TGT_GIVEN_SRC = "tgt_given_src"
    SRC_GIVEN_TGT = "src_given_tgt"


class Verdict(enum.Enum):
    X_TO_Y = "x_to_y"
    Y_TO_X = "y_to_x"
    TIE = "tie"


@dataclass(frozen=True)
class CodelengthReport:
    kind: CodeKind
    uniform_block_bits: float
    per_block_bits: tuple[float, ...]  # blocks 2..K
    total_bits: float
    schedule: BlockSchedule
    model_fingerprint: str = ""

    def __post_init__(self):
        parts = (self.uniform_block_bits, *self.per_block_bits, self.total_bits)
        if any(b < 0 or not math.isfinite(b) for b in parts):
            raise ComputationError(f"{self.kind.value}: non-finite or negative bits")
        if len(self.per_block_bits) != self.schedule.num_blocks - 1:
            raise ComputationError(
                f"{self.kind.value}: expected {self.schedule.num_blocks - 1} "
                f"model-coded blocks, got {len(self.per_block_bits)}")

    @property
    def total_kbits(self) -> float:
        return self.total_bits / KBIT


@dataclass(frozen=True)
class DirectionVerdict:
    l_causal_bits: float      # MDL(X) + MDL(Y|X)
    l_anticausal_bits: float  # MDL(Y) + MDL(X|Y)
    verdict: Verdict
    margin_kbits: float       # (anticausal - causal) / 1000
    reports: tuple[CodelengthReport, ...] = field(default=(), compare=False)

    @classmethod
    def from_totals(cls, l_causal_bits: float, l_anticausal_bits: float,
                    reports: tuple[CodelengthReport, ...] = ()) -> "DirectionVerdict":
        diff = l_anticausal_bits - l_causal_bits
        if diff > 0:
            verdict = Verdict.X_TO_Y
        elif diff < 0:
            verdict = Verdict.Y_TO_X
        else:
            verdict = Verdict.TIE
        return cls(l_causal_bits=l_causal_bits, l_anticausal_bits=l_anticausal_bits,
                   verdict=verdict, margin_kbits=diff / KBIT, reports=reports)

    def report(self, kind: CodeKind) -> CodelengthReport:
        for rep in self.reports:
            if rep.kind is kind:
                return rep
        raise InputError(f"verdict carries no {kind.value} report")


# -- model factories -----------------------------------------------------------
#
# A factory is a callable building a model from a training prefix; an optional
# ``fingerprint`` attribute identifies its configuration in reports.

def make_lm_factory(config: LmConfig | None = None) -> Callable:
    cfg = config if config is not None else LmConfig()

    def factory(sequences: Sequence[TokenSeq], vocab: Vocabulary):
        return train_lm(sequences, vocab, cfg)

    factory.fingerprint = cfg.fingerprint()
    return factory


def uniform_lm_factory() -> Callable:
    def factory(sequences: Sequence[TokenSeq], vocab: Vocabulary):
        return uniform_lm(vocab)

    factory.fingerprint = "uniform-lm"
    return factory


def make_channel_factory(config: ChannelConfig | None = None) -> Callable:
    cfg = config if config is not None else ChannelConfig()

    def factory(pairs: Sequence, in_vocab: Vocabulary, out_vocab: Vocabulary):
        return train_channel(pairs, in_vocab, out_vocab, cfg)

    factory.fingerprint = cfg.fingerprint()
    return factory


def uniform_channel_factory() -> Callable:
    def factory(pairs: Sequence, in_vocab: Vocabulary, out_vocab: Vocabulary):
        return uniform_channel(in_vocab, out_vocab)

    factory.fingerprint = "uniform-channel"
    return factory


def _factory_fingerprint(factory) -> str:
    return getattr(factory, "fingerprint", "custom")


def _check_schedule(n_items: int, schedule: BlockSchedule, what: str) -> None:
    if n_items != schedule.n:
        raise ConfigError(
            f"schedule ends at t_K = {schedule.n} but the corpus has n = {n_items} {what}")


# -- online codes ---------------------------------------------------------------

def marginal_mdl(sequences: Sequence[TokenSeq], vocab: Vocabulary,
                 schedule: BlockSchedule, lm_factory: Callable,
                 kind: CodeKind = CodeKind.MARGINAL_X) -> CodelengthReport:
    """Online code of one side alone: uniform first block, then per-block
    codelengths under models trained from scratch on each preceding prefix."""
    seqs = list(sequences)
    _check_schedule(len(seqs), schedule, "sequences")
    t = schedule.indices
    log2v = math.log2(vocab.size)
    uniform_bits = float(sum(len(s) for s in seqs[:t[0]])) * log2v
    per_block: list[float] = []
    for j in range(1, len(t)):
        prefix = seqs[:t[j - 1]]
        block = seqs[t[j - 1]:t[j]]
        try:
            model = lm_factory(prefix, vocab)
        except CausalMdlError:
            raise
        except Exception as exc:
            raise ComputationError(f"model factory failed for block {j + 1}: {exc}") from exc
        per_block.append(sum(model.codelength(s) for s in block))
    total = uniform_bits + sum(per_block)
    return CodelengthReport(kind=kind, uniform_block_bits=uniform_bits,
                            per_block_bits=tuple(per_block), total_bits=total,
                            schedule=schedule,
                            model_fingerprint=_factory_fingerprint(lm_factory))


def conditional_mdl(pairs: Sequence, src_vocab: Vocabulary, tgt_vocab: Vocabulary,
                    schedule: BlockSchedule, channel_factory: Callable,
                    coded_side: CodedSide = CodedSide.TGT_GIVEN_SRC) -> CodelengthReport:
    """Online code of one side given the other, per-block models trained on
    prefix pairs. coded_side selects which side is transmitted (and therefore
    which vocabulary prices the uniform first block)."""
    pair_list = [(p.src, p.tgt) if hasattr(p, "src") else tuple(p) for p in pairs]
    _check_schedule(len(pair_list), schedule, "pairs")
    if coded_side is CodedSide.TGT_GIVEN_SRC:
        oriented = pair_list
        in_vocab, out_vocab = src_vocab, tgt_vocab
        kind = CodeKind.COND_Y_GIVEN_X
    else:
        oriented = [(tgt, src) for src, tgt in pair_list]
        in_vocab, out_vocab = tgt_vocab, src_vocab
        kind = CodeKind.COND_X_GIVEN_Y
    t = schedule.indices
    log2v = math.log2(out_vocab.size)
    uniform_bits = float(sum(len(out) for _, out in oriented[:t[0]])) * log2v
    per_block: list[float] = []
    for j in range(1, len(t)):
        prefix = oriented[:t[j - 1]]
        block = oriented[t[j - 1]:t[j]]
        try:
            model = channel_factory(prefix, in_vocab, out_vocab)
        except CausalMdlError:
            raise
        except Exception as exc:
            raise ComputationError(f"model factory failed for block {j + 1}: {exc}") from exc
        per_block.append(sum(model.codelength(src, out) for src, out in block))
    total = uniform_bits + sum(per_block)
    return CodelengthReport(kind=kind, uniform_block_bits=uniform_bits,
                            per_block_bits=tuple(per_block), total_bits=total,
                            schedule=schedule,
                            model_fingerprint=_factory_fingerprint(channel_factory))


def direction_test(corpus: ParallelCorpus, schedule: BlockSchedule,
                   lm_factory: Callable, channel_factory: Callable) -> DirectionVerdict:
    """Full two-way comparison: MDL(X)+MDL(Y|X) vs MDL(Y)+MDL(X|Y)."""
    marg_x = marginal_mdl(corpus.src_seqs, corpus.src_vocab, schedule,
                          lm_factory, CodeKind.MARGINAL_X)
    marg_y = marginal_mdl(corpus.tgt_seqs, corpus.tgt_vocab, schedule,
                          lm_factory, CodeKind.MARGINAL_Y)
    cond_yx = conditional_mdl(corpus.pairs, corpus.src_vocab, corpus.tgt_vocab,
                              schedule, channel_factory, CodedSide.TGT_GIVEN_SRC)
    cond_xy = conditional_mdl(corpus.pairs, corpus.src_vocab, corpus.tgt_vocab,
                              schedule, channel_factory, CodedSide.SRC_GIVEN_TGT)
    return DirectionVerdict.from_totals(
        l_causal_bits=marg_x.total_bits + cond_yx.total_bits,
        l_anticausal_bits=marg_y.total_bits + cond_xy.total_bits,
        reports=(marg_x, marg_y, cond_yx, cond_xy),
    )


# -- serialization ---------------------------------------------------------------

def reports_to_csv(reports: Sequence[CodelengthReport], path: str | Path) -> None:
    """CSV rows (kind, block_index, bits); block 1 is the uniform block."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "block_index", "bits"])
        for rep in reports:
            writer.writerow([rep.kind.value, 1, repr(rep.uniform_block_bits)])
            for j, bits in enumerate(rep.per_block_bits, start=2):
                writer.writerow([rep.kind.value, j, repr(bits)])


def verdict_summary(verdict: DirectionVerdict) -> dict:
    """JSON-ready summary: component totals, verdict, margin."""
    out = {
        "l_causal_bits": verdict.l_causal_bits,
        "l_anticausal_bits": verdict.l_anticausal_bits,
        "verdict": verdict.verdict.value,
        "margin_kbits": verdict.margin_kbits,
    }
    for rep in verdict.reports:
        out[f"total_bits[{rep.kind.value}]"] = rep.total_bits
    return out
