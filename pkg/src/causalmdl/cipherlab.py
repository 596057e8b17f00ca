"""Synthetic decipherment corpora: ROT13 plus four seeded noise operators.

The construction keeps one side clean (the cause) and corrupts the other
(the effect), producing direction-labeled parallel corpora. Noise operators
run in the fixed order WORD_MASK -> PERMUTE -> ROLL -> INSERT so a single
seed pins the whole pipeline.
"""

from __future__ import annotations

import enum
import hashlib
import math
import random
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import (
    DirectionLabel,
    ParallelCorpus,
    SequencePair,
    TokenizeMode,
    Vocabulary,
    detokenize,
    reserved_symbols,
    tokenize,
)
from .errors import ConfigError, InputError

_LOWER = "abcdefghijklmnopqrstuvwxyz"
_UPPER = _LOWER.upper()
_ROT13_TABLE = str.maketrans(
    _LOWER + _UPPER,
    _LOWER[13:] + _LOWER[:13] + _UPPER[13:] + _UPPER[:13],
)


def rot13(text: str) -> str:
    """Shift ASCII letters 13 places, case preserved; everything else fixed."""
    return text.translate(_ROT13_TABLE)


def derive_seed(*parts) -> int:
    """Stable 64-bit stream seed from arbitrary hashable parts."""
    blob = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big")


class NoiseKind(enum.Enum):
    WORD_MASK = "word_mask"
    PERMUTE = "permute"
    ROLL = "roll"
    INSERT = "insert"


ALL_NOISE = frozenset(NoiseKind)


class NoisedSide(enum.Enum):
    SOURCE_TEXT = "source_text"
    CIPHERTEXT = "ciphertext"


@dataclass(frozen=True)
class NoiseSpec:
    p: float = 0.05
    enabled: frozenset = ALL_NOISE
    mask_symbol: str = ""  # empty = resolve from the tokenization mode in use
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"noise probability must be in [0,1], got {self.p}")
        object.__setattr__(self, "enabled", frozenset(self.enabled))
        if any(not isinstance(k, NoiseKind) for k in self.enabled):
            raise ConfigError("enabled must contain NoiseKind members")

    def resolved_mask(self, mode: TokenizeMode) -> str:
        return self.mask_symbol or reserved_symbols(mode)[1]


def _mask_words(tokens: list[str], p: float, mask: str, mode: TokenizeMode,
                rng: random.Random) -> list[str]:
    if mode is TokenizeMode.WORD:
        return [mask if rng.random() < p else t for t in tokens]
    # CHAR: a word is a maximal run of non-whitespace tokens; a masked run
    # collapses to a single mask token, so length can change.
    out: list[str] = []
    i = 0
    n = len(tokens)
    while i < n:
        if tokens[i].isspace():
            out.append(tokens[i])
            i += 1
            continue
        j = i
        while j < n and not tokens[j].isspace():
            j += 1
        if rng.random() < p:
            out.append(mask)
        else:
            out.extend(tokens[i:j])
        i = j
    return out


def apply_noise(tokens: Sequence[str], spec: NoiseSpec, rng: random.Random,
                mode: TokenizeMode = TokenizeMode.CHAR) -> list[str]:
    """Corrupt a symbol sequence; deterministic given the rng state.

    Operators fire in the order WORD_MASK, PERMUTE, ROLL, INSERT; each later
    stage sees the previous stage's output. PERMUTE shuffles one contiguous
    span of length ceil(p*L); ROLL rotates left by a uniform offset in
    [1, L-1]; INSERT adds, at each inter-token gap independently, one symbol
    drawn uniformly from the sequence's current symbol set plus the mask.
    Sequences of length 1 skip PERMUTE and ROLL.
    """
    toks = list(tokens)
    if not toks:
        raise InputError("cannot apply noise to an empty sequence")
    p = spec.p
    if p <= 0.0:
        return toks
    mask = spec.resolved_mask(mode)
    if NoiseKind.WORD_MASK in spec.enabled:
        toks = _mask_words(toks, p, mask, mode, rng)
    if NoiseKind.PERMUTE in spec.enabled and len(toks) >= 2 and rng.random() < p:
        length = len(toks)
        span = min(length, math.ceil(p * length))
        start = rng.randrange(0, length - span + 1)
        window = toks[start:start + span]
        rng.shuffle(window)
        toks[start:start + span] = window
    if NoiseKind.ROLL in spec.enabled and len(toks) >= 2 and rng.random() < p:
        offset = rng.randrange(1, len(toks))
        toks = toks[offset:] + toks[:offset]
    if NoiseKind.INSERT in spec.enabled and len(toks) >= 2:
        alphabet = sorted(set(toks) | {mask})
        out = [toks[0]]
        for tok in toks[1:]:
            if rng.random() < p:
                out.append(rng.choice(alphabet))
            out.append(tok)
        toks = out
    return toks


@dataclass(frozen=True)
class CipherDatasetSpec:
    lines: tuple[str, ...]
    noised_side: NoisedSide = NoisedSide.CIPHERTEXT
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    mode: TokenizeMode = TokenizeMode.CHAR
    name: str = ""  # empty = canonical family name for the noised side

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        if not self.lines:
            raise InputError("dataset spec needs at least one text line")
        mask = self.noise.resolved_mask(self.mode)
        if mask not in reserved_symbols(self.mode):
            raise ConfigError(
                f"mask symbol {mask!r} is not a reserved symbol for {self.mode.value} mode")

    @property
    def dataset_name(self) -> str:
        if self.name:
            return self.name
        return ("En→Cipher" if self.noised_side is NoisedSide.CIPHERTEXT
                else "Cipher→En")


def generate_cipher_dataset(spec: CipherDatasetSpec) -> ParallelCorpus:
    """Build the direction-labeled corpus: clean side is the cause.

    CIPHERTEXT noised: pairs (english, noise(rot13(english))) named En→Cipher.
    SOURCE_TEXT noised: pairs (rot13(english), noise(english)) named Cipher→En.
    Line i uses an RNG stream seeded by (rng_seed, i), so generation order
    and worker count never change the output.
    """
    mode = spec.mode
    src_lists: list[list[str]] = []
    tgt_lists: list[list[str]] = []
    for idx, line in enumerate(spec.lines):
        if not line:
            raise InputError(f"line {idx} is empty")
        cipher = rot13(line)
        if spec.noised_side is NoisedSide.CIPHERTEXT:
            clean_text, effect_text = line, cipher
        else:
            clean_text, effect_text = cipher, line
        rng = random.Random(derive_seed(spec.noise.rng_seed, idx))
        src_lists.append(tokenize(clean_text, mode))
        tgt_lists.append(apply_noise(tokenize(effect_text, mode), spec.noise, rng, mode))

    pad, mask = reserved_symbols(mode)
    src_vocab = Vocabulary((s for syms in src_lists for s in syms), pad, mask)
    tgt_vocab = Vocabulary((s for syms in tgt_lists for s in syms), pad, mask)
    pairs = tuple(
        SequencePair(
            src=src_vocab.encode(src_syms, raw=detokenize(src_syms, mode)),
            tgt=tgt_vocab.encode(tgt_syms, raw=detokenize(tgt_syms, mode)),
            direction=DirectionLabel.X_TO_Y,
        )
        for src_syms, tgt_syms in zip(src_lists, tgt_lists)
    )
    return ParallelCorpus(
        pairs=pairs,
        direction=DirectionLabel.X_TO_Y,
        src_vocab=src_vocab,
        tgt_vocab=tgt_vocab,
        name=spec.dataset_name,
        src_mode=mode,
        tgt_mode=mode,
    )


# -- deterministic text supply -------------------------------------------------

_DETS = ("the", "a", "that", "this", "every", "one", "another", "some")

_ADJECTIVES = (
    "old", "young", "tall", "small", "grey", "quiet", "bright", "dark",
    "heavy", "light", "narrow", "wide", "ancient", "broken", "clever",
    "curious", "distant", "dusty", "early", "empty", "faded", "gentle",
    "golden", "green", "hidden", "hollow", "honest", "humble", "iron",
    "little", "lonely", "lost", "loud", "low", "mild", "misty", "pale",
    "patient", "plain", "proud", "rough", "round", "rusty", "silent",
    "simple", "steady", "stern", "warm",
)

_NOUNS = (
    "cat", "dog", "man", "girl", "boy", "friend", "queen", "sailor",
    "baker", "owl", "river", "cloud", "teacher", "thief", "gardener",
    "bird", "wolf", "miller", "child", "king", "door", "letter", "bridge",
    "apple", "lantern", "basket", "garden", "stone", "market", "map",
    "boat", "candle", "tower", "coin", "forest", "ladder", "mirror",
    "ribbon", "well", "drum", "anchor", "arrow", "barrel", "bell", "blanket",
    "bottle", "bucket", "carpet", "cellar", "chair", "chest", "church",
    "cottage", "cradle", "crow", "crown", "field", "fire", "fisherman",
    "flag", "fox", "gate", "goat", "hammer", "harbor", "hawk", "hedge",
    "hill", "horse", "hunter", "island", "kettle", "key", "knight", "lake",
    "lamp", "meadow", "merchant", "mill", "monk", "mountain", "needle",
    "nest", "oak", "orchard", "oven", "path", "pearl", "pigeon", "pond",
    "priest", "rabbit", "road", "roof", "rope", "saddle", "shepherd",
    "ship", "smith", "sparrow", "spoon", "stable", "stream", "table",
    "tailor", "valley", "village", "wagon", "wall", "weaver", "window",
)

_VERBS = (
    "sees", "finds", "takes", "follows", "watches", "carries", "paints",
    "opens", "builds", "breaks", "hides", "holds", "leaves", "remembers",
    "wants", "hears", "keeps", "moves", "shows", "trusts", "lifts", "drops",
    "sells", "buys", "mends", "borrows", "returns", "gathers", "counts",
    "measures", "guards", "steals", "shares", "crosses", "climbs", "visits",
    "cleans", "fills", "burns", "buries", "draws", "folds", "hangs",
    "locks", "marks", "names", "offers", "passes", "pulls", "pushes",
    "raises", "reads", "repairs", "rows", "saves", "sweeps",
)

_PREPS = (
    "near", "under", "behind", "beside", "beyond", "inside", "against",
    "past", "toward", "along",
)

_TIMES = (
    "at dawn", "by the sea", "in the rain", "after dark", "every morning",
    "with great care", "in silence", "before noon", "under the moon",
    "without a word", "at dusk", "all winter",
)


def _noun_phrase(rng: random.Random) -> str:
    det = rng.choice(_DETS)
    noun = rng.choice(_NOUNS)
    if rng.random() < 0.45:
        return f"{det} {rng.choice(_ADJECTIVES)} {noun}"
    return f"{det} {noun}"


def synthetic_lines(n: int, seed: int, with_tail_prob: float = 0.5) -> list[str]:
    """Deterministic English-like sentences for desk-scale corpora.

    Clauses over a compositional lexicon (determiner + optional adjective +
    noun phrases, transitive verbs, prepositional and time tails, an optional
    coordinated second clause). Not natural language, but the word inventory
    and letter statistics are rich enough that inverse models stay hungry for
    data at few-hundred-line training sizes.
    """
    if n < 1:
        raise InputError(f"need n >= 1 lines, got {n}")
    if not 0.0 <= with_tail_prob <= 1.0:
        raise ConfigError(f"with_tail_prob must be in [0,1], got {with_tail_prob}")
    rng = random.Random(derive_seed("synthetic-lines", seed))
    out = []
    for _ in range(n):
        parts = [_noun_phrase(rng), rng.choice(_VERBS), _noun_phrase(rng)]
        if rng.random() < 0.3:
            parts += ["and", rng.choice(_VERBS), _noun_phrase(rng)]
        if rng.random() < with_tail_prob:
            if rng.random() < 0.5:
                parts.append(rng.choice(_TIMES))
            else:
                parts += [rng.choice(_PREPS), _noun_phrase(rng)]
        out.append(" ".join(parts))
    return out


def load_lines(path) -> list[str]:
    """Read a UTF-8 text file into nonempty stripped lines."""
    from pathlib import Path

    path = Path(path)
    if not path.exists():
        raise InputError(f"text file not found: {path}")
    lines = [ln.rstrip("\n") for ln in path.read_text(encoding="utf-8").splitlines()]
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise InputError(f"no usable lines in {path}")
    return lines
