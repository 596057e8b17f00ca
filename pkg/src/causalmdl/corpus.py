"""Direction-annotated parallel corpora: tokenization, vocabularies, splits,
and the cumulative block schedule used by the online code.

All types are immutable value objects; they can be shared freely across
concurrent workers.
"""

from __future__ import annotations

import enum
import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, InputError

# Reserved vocabulary symbols. WORD-mode corpora use tag-like strings; CHAR-mode
# corpora need single-codepoint symbols so that text round-trips through
# character tokenization.
PAD_WORD = "<pad>"
MASK_WORD = "<mask>"
PAD_CHAR = "␀"   # ␀
MASK_CHAR = "█"  # █


class TokenizeMode(enum.Enum):
    CHAR = "char"
    WORD = "word"


class DirectionLabel(enum.Enum):
    X_TO_Y = "x_to_y"
    Y_TO_X = "y_to_x"
    UNKNOWN = "unknown"


def reserved_symbols(mode: TokenizeMode) -> tuple[str, str]:
    """(pad, mask) symbol pair appropriate for a tokenization mode."""
    if mode is TokenizeMode.CHAR:
        return PAD_CHAR, MASK_CHAR
    return PAD_WORD, MASK_WORD


def tokenize(text: str, mode: TokenizeMode) -> list[str]:
    """Split text into token symbols (pre-vocabulary).

    CHAR yields one symbol per Unicode scalar, spaces included; WORD splits
    on runs of whitespace.
    """
    if not text:
        raise InputError("cannot tokenize empty text")
    if mode is TokenizeMode.CHAR:
        return list(text)
    return text.split()


def detokenize(symbols: Iterable[str], mode: TokenizeMode) -> str:
    joiner = "" if mode is TokenizeMode.CHAR else " "
    return joiner.join(symbols)


@dataclass(frozen=True)
class TokenSeq:
    """An encoded token sequence; ``raw`` optionally keeps the source text."""

    tokens: tuple[int, ...]
    raw: str | None = None

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


class Vocabulary:
    """Bijective symbol<->id map with reserved PAD and MASK entries.

    PAD is id 0 and MASK is id 1; remaining ids follow first-occurrence
    order of the symbols the vocabulary was built from.
    """

    def __init__(self, symbols: Iterable[str], pad_symbol: str = PAD_WORD,
                 mask_symbol: str = MASK_WORD):
        if pad_symbol == mask_symbol:
            raise ConfigError("PAD and MASK symbols must be distinct")
        self.pad_symbol = pad_symbol
        self.mask_symbol = mask_symbol
        self._id_to_symbol: list[str] = [pad_symbol, mask_symbol]
        self._symbol_to_id: dict[str, int] = {pad_symbol: 0, mask_symbol: 1}
        for sym in symbols:
            if sym not in self._symbol_to_id:
                self._symbol_to_id[sym] = len(self._id_to_symbol)
                self._id_to_symbol.append(sym)

    PAD_ID = 0
    MASK_ID = 1

    @property
    def size(self) -> int:
        return len(self._id_to_symbol)

    def symbol_to_id(self, symbol: str) -> int:
        try:
            return self._symbol_to_id[symbol]
        except KeyError:
            raise InputError(f"symbol not in vocabulary: {symbol!r}") from None

    def id_to_symbol(self, token_id: int) -> str:
        if not 0 <= token_id < self.size:
            raise InputError(f"token id out of range: {token_id}")
        return self._id_to_symbol[token_id]

    def encode(self, symbols: Sequence[str], raw: str | None = None) -> TokenSeq:
        return TokenSeq(tuple(self.symbol_to_id(s) for s in symbols), raw=raw)

    def decode(self, seq: TokenSeq | Sequence[int]) -> list[str]:
        ids = seq.tokens if isinstance(seq, TokenSeq) else seq
        return [self.id_to_symbol(i) for i in ids]

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._symbol_to_id

    def __eq__(self, other) -> bool:
        return (isinstance(other, Vocabulary)
                and self._id_to_symbol == other._id_to_symbol)

    def __repr__(self) -> str:
        return f"Vocabulary(size={self.size})"


@dataclass(frozen=True)
class SequencePair:
    src: TokenSeq
    tgt: TokenSeq
    direction: DirectionLabel = DirectionLabel.UNKNOWN


@dataclass(frozen=True)
class ParallelCorpus:
    """Dataset of aligned (src, tgt) token sequences over two fixed vocabularies."""

    pairs: tuple[SequencePair, ...]
    direction: DirectionLabel
    src_vocab: Vocabulary
    tgt_vocab: Vocabulary
    name: str = ""
    src_mode: TokenizeMode = TokenizeMode.CHAR
    tgt_mode: TokenizeMode = TokenizeMode.CHAR

    def __post_init__(self):
        if not self.pairs:
            raise InputError(f"corpus {self.name!r} has no pairs")
        for k, pair in enumerate(self.pairs):
            if len(pair.src) < 1 or len(pair.tgt) < 1:
                raise InputError(f"pair {k} of corpus {self.name!r} has an empty side")

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def src_seqs(self) -> list[TokenSeq]:
        return [p.src for p in self.pairs]

    @property
    def tgt_seqs(self) -> list[TokenSeq]:
        return [p.tgt for p in self.pairs]

    def take(self, indices: Sequence[int], name: str | None = None) -> "ParallelCorpus":
        """Sub-corpus at the given pair indices, sharing both vocabularies."""
        return ParallelCorpus(
            pairs=tuple(self.pairs[i] for i in indices),
            direction=self.direction,
            src_vocab=self.src_vocab,
            tgt_vocab=self.tgt_vocab,
            name=self.name if name is None else name,
            src_mode=self.src_mode,
            tgt_mode=self.tgt_mode,
        )

    def swapped(self) -> "ParallelCorpus":
        """Mirror corpus with src and tgt roles exchanged."""
        flip = {DirectionLabel.X_TO_Y: DirectionLabel.Y_TO_X,
                DirectionLabel.Y_TO_X: DirectionLabel.X_TO_Y,
                DirectionLabel.UNKNOWN: DirectionLabel.UNKNOWN}
        return ParallelCorpus(
            pairs=tuple(SequencePair(p.tgt, p.src, flip[p.direction]) for p in self.pairs),
            direction=flip[self.direction],
            src_vocab=self.tgt_vocab,
            tgt_vocab=self.src_vocab,
            name=self.name + "(swapped)" if self.name else "(swapped)",
            src_mode=self.tgt_mode,
            tgt_mode=self.src_mode,
        )


@dataclass(frozen=True)
class BlockSchedule:
    """Cumulative 1-based end indices t_1 < ... < t_K of the online-code blocks."""

    indices: tuple[int, ...]
    fractions: tuple[float, ...] = ()

    def __post_init__(self):
        t = self.indices
        if len(t) < 2:
            raise ConfigError("schedule needs at least 2 blocks")
        if t[0] < 1 or any(a >= b for a, b in zip(t, t[1:])):
            raise ConfigError(f"schedule indices must be strictly increasing from >= 1: {t}")

    @property
    def n(self) -> int:
        return self.indices[-1]

    @property
    def num_blocks(self) -> int:
        return len(self.indices)

    def block_sizes(self) -> list[int]:
        prev = 0
        sizes = []
        for t in self.indices:
            sizes.append(t - prev)
            prev = t
        return sizes


# Percentages taken by the ten standard blocks; they oversum slightly, which
# the final clamp absorbs.
DEFAULT_FRACTIONS = (0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.25, 12.5, 25.0, 50.0)


def make_block_schedule(n: int, fractions: Sequence[float] = DEFAULT_FRACTIONS) -> BlockSchedule:
    """Block schedule with sizes max(1, round(f*n/100)) and final index clamped to n.

    Rounding is half-away-from-zero. When the raw cumulative indices overshoot
    n, the tail is truncated backwards while keeping every block size >= 1,
    which is always possible for n >= len(fractions).
    """
    if any(f <= 0 for f in fractions):
        raise ConfigError(f"fractions must be positive: {fractions}")
    k = len(fractions)
    if k < 2:
        raise ConfigError("need at least 2 fractions")
    if n < k:
        raise ConfigError(f"cannot assign >= 1 pair to each of {k} blocks with n={n}")
    sizes = [max(1, math.floor(f * n / 100.0 + 0.5)) for f in fractions]
    cum = []
    total = 0
    for s in sizes:
        total += s
        cum.append(total)
    cum[-1] = n
    for j in range(k - 2, -1, -1):
        cum[j] = min(cum[j], cum[j + 1] - 1)
    return BlockSchedule(indices=tuple(cum), fractions=tuple(fractions))


@dataclass(frozen=True)
class CorpusSplit:
    train: ParallelCorpus
    valid: ParallelCorpus | None
    test: ParallelCorpus | None
    seed: int


def split(corpus: ParallelCorpus, test_n: int, valid_n: int, seed: int) -> CorpusSplit:
    """Uniform random disjoint train/valid/test selection, deterministic per seed."""
    n = len(corpus)
    if test_n < 0 or valid_n < 0:
        raise ConfigError("split sizes must be non-negative")
    if test_n + valid_n >= n:
        raise ConfigError(f"test_n + valid_n = {test_n + valid_n} must be < n = {n}")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    test_idx = sorted(order[:test_n])
    valid_idx = sorted(order[test_n:test_n + valid_n])
    train_idx = sorted(order[test_n + valid_n:])
    return CorpusSplit(
        train=corpus.take(train_idx, name=f"{corpus.name}/train"),
        valid=corpus.take(valid_idx, name=f"{corpus.name}/valid") if valid_n else None,
        test=corpus.take(test_idx, name=f"{corpus.name}/test") if test_n else None,
        seed=seed,
    )


def _corpus_direction(labels: Iterable[DirectionLabel]) -> DirectionLabel:
    seen = {lab for lab in labels if lab is not DirectionLabel.UNKNOWN}
    if len(seen) == 1:
        return next(iter(seen))
    return DirectionLabel.UNKNOWN


def load_parallel_jsonl(path: str | Path,
                        src_mode: TokenizeMode = TokenizeMode.CHAR,
                        tgt_mode: TokenizeMode = TokenizeMode.CHAR,
                        name: str | None = None) -> ParallelCorpus:
    """Load a corpus from JSONL: one object per line with "src", "tgt" and an
    optional "direction" in {"x_to_y","y_to_x","unknown"}.

    Vocabularies are built over the full file, one per side. Mixed per-line
    directions leave the corpus direction UNKNOWN with per-pair labels kept.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"corpus file not found: {path}")
    records: list[tuple[list[str], list[str], str | None, str, str]] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: malformed JSON: {exc}") from None
            if not isinstance(obj, dict) or "src" not in obj or "tgt" not in obj:
                raise InputError(f"{path}:{lineno}: record must have 'src' and 'tgt' fields")
            src_text, tgt_text = obj["src"], obj["tgt"]
            if not isinstance(src_text, str) or not src_text:
                raise InputError(f"{path}:{lineno}: 'src' must be a non-empty string")
            if not isinstance(tgt_text, str) or not tgt_text:
                raise InputError(f"{path}:{lineno}: 'tgt' must be a non-empty string")
            direction = obj.get("direction")
            if direction is not None and direction not in {d.value for d in DirectionLabel}:
                raise InputError(f"{path}:{lineno}: bad 'direction' value: {direction!r}")
            src_syms = tokenize(src_text, src_mode)
            tgt_syms = tokenize(tgt_text, tgt_mode)
            if not src_syms or not tgt_syms:
                raise InputError(f"{path}:{lineno}: record tokenizes to an empty side")
            records.append((src_syms, tgt_syms, direction, src_text, tgt_text))
    if not records:
        raise InputError(f"empty corpus file: {path}")

    src_vocab = Vocabulary((s for rec in records for s in rec[0]), *reserved_symbols(src_mode))
    tgt_vocab = Vocabulary((s for rec in records for s in rec[1]), *reserved_symbols(tgt_mode))
    pairs = []
    for src_syms, tgt_syms, direction, src_text, tgt_text in records:
        label = DirectionLabel(direction) if direction else DirectionLabel.UNKNOWN
        pairs.append(SequencePair(
            src=src_vocab.encode(src_syms, raw=src_text),
            tgt=tgt_vocab.encode(tgt_syms, raw=tgt_text),
            direction=label,
        ))
    return ParallelCorpus(
        pairs=tuple(pairs),
        direction=_corpus_direction(p.direction for p in pairs),
        src_vocab=src_vocab,
        tgt_vocab=tgt_vocab,
        name=path.stem if name is None else name,
        src_mode=src_mode,
        tgt_mode=tgt_mode,
    )


def save_parallel_jsonl(corpus: ParallelCorpus, path: str | Path) -> None:
    """Write a corpus back to JSONL; the inverse of load_parallel_jsonl."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for pair in corpus.pairs:
            src_text = pair.src.raw if pair.src.raw is not None else detokenize(
                corpus.src_vocab.decode(pair.src), corpus.src_mode)
            tgt_text = pair.tgt.raw if pair.tgt.raw is not None else detokenize(
                corpus.tgt_vocab.decode(pair.tgt), corpus.tgt_mode)
            rec = {"src": src_text, "tgt": tgt_text, "direction": pair.direction.value}
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
