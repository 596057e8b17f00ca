"""Count-based probabilistic sequence models.

Two model families, both smoothed by Witten-Bell interpolation down to a
uniform floor so every in-vocabulary token keeps positive probability:

* ``WittenBellLm``: an n-gram language model over single sequences.
* ``ChannelModel``: a position-aligned conditional model
  p(tgt_t | src[t-w .. t+w], tgt[t-k .. t-1]) whose backoff chain narrows the
  source window to the centered token first, then shortens the target
  history, then drops to the target unigram and finally to uniform.

Training is pure counting; models are immutable after construction and safe
to share across threads. Contexts are packed into integers (one table per
backoff level) to keep dictionary traffic cheap.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import TokenSeq, TokenizeMode, Vocabulary
from .errors import ConfigError, InputError

PAD_ID = Vocabulary.PAD_ID

_LOG2 = math.log(2.0)


class Smoothing(enum.Enum):
    WITTEN_BELL = "witten_bell"


@dataclass(frozen=True)
class LmConfig:
    order: int = 5
    smoothing: Smoothing = Smoothing.WITTEN_BELL

    def __post_init__(self):
        if self.order < 1:
            raise ConfigError(f"n-gram order must be >= 1, got {self.order}")

    @classmethod
    def for_mode(cls, mode: TokenizeMode) -> "LmConfig":
        return cls(order=5 if mode is TokenizeMode.CHAR else 3)

    def fingerprint(self) -> str:
        return _fingerprint({"kind": "lm", "order": self.order,
                             "smoothing": self.smoothing.value})


@dataclass(frozen=True)
class ChannelConfig:
    target_history: int = 2
    source_window: int = 1
    smoothing: Smoothing = Smoothing.WITTEN_BELL

    def __post_init__(self):
        if self.target_history < 0 or self.source_window < 0:
            raise ConfigError("target_history and source_window must be >= 0")

    def fingerprint(self) -> str:
        return _fingerprint({"kind": "channel", "k": self.target_history,
                             "w": self.source_window, "smoothing": self.smoothing.value})


def _fingerprint(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _check_ids(seq: Sequence[int], size: int, what: str) -> None:
    if len(seq) and (min(seq) < 0 or max(seq) >= size):
        raise InputError(f"{what} contains token ids outside the vocabulary (size {size})")


def _tokens(seq) -> tuple[int, ...]:
    return seq.tokens if isinstance(seq, TokenSeq) else tuple(seq)


class _CountTables:
    """Shared Witten-Bell machinery over a stack of packed-context tables.

    ``tables[i]`` maps a packed context key to ``[total, {token: count}]``;
    level 0 of the stack is the coarsest non-trivial context. The unigram
    level (empty context) is kept separately and interpolates with the
    uniform distribution, so probabilities chain as
    p = (c + T * p_coarser) / (total + T) from uniform upward.
    """

    def __init__(self, vocab_size: int, num_levels: int):
        self.vocab_size = vocab_size
        self.unigram_total = 0.0
        self.unigram: dict[int, float] = {}
        self.tables: list[dict[int, list]] = [dict() for _ in range(num_levels)]
        self._unigram_vec: np.ndarray | None = None
        self._argmax_cache: dict[tuple, int] = {}

    def add(self, token: int, keys: Sequence[int]) -> None:
        if self._unigram_vec is not None or self._argmax_cache:
            self._unigram_vec = None
            self._argmax_cache = {}
        uni = self.unigram
        uni[token] = uni.get(token, 0) + 1
        self.unigram_total += 1
        for table, key in zip(self.tables, keys):
            cell = table.get(key)
            if cell is None:
                table[key] = [1, {token: 1}]
            else:
                cell[0] += 1
                counts = cell[1]
                counts[token] = counts.get(token, 0) + 1

    # -- evaluation ---------------------------------------------------------

    def prob(self, token: int, keys: Sequence[int]) -> float:
        v = self.vocab_size
        tot0 = self.unigram_total
        if tot0 > 0:
            t0 = len(self.unigram)
            p = (self.unigram.get(token, 0) + t0 / v) / (tot0 + t0)
        else:
            p = 1.0 / v
        for table, key in zip(self.tables, keys):
            cell = table.get(key)
            if cell is not None:
                counts = cell[1]
                t = len(counts)
                p = (counts.get(token, 0) + t * p) / (cell[0] + t)
        return p

    def dist(self, keys: Sequence[int]) -> np.ndarray:
        v = self.vocab_size
        if self.unigram_total > 0:
            if self._unigram_vec is None:
                vec = np.zeros(v)
                for w, c in self.unigram.items():
                    vec[w] = c
                t0 = len(self.unigram)
                self._unigram_vec = (vec + t0 / v) / (self.unigram_total + t0)
            p = self._unigram_vec
        else:
            p = np.full(v, 1.0 / v)
        for table, key in zip(self.tables, keys):
            cell = table.get(key)
            if cell is not None:
                counts = cell[1]
                t = len(counts)
                vec = np.zeros(v)
                for w, c in counts.items():
                    vec[w] = c
                p = (vec + t * p) / (cell[0] + t)
        return p

    def argmax(self, keys: Sequence[int]) -> int:
        """Most probable next token; exact ties resolve to the lowest id."""
        # Finest observed level: a strictly dominant count wins over any
        # backoff completion, skipping the full distribution.
        for table, key in zip(reversed(self.tables), reversed(keys)):
            cell = table.get(key)
            if cell is None:
                continue
            counts = cell[1]
            t = len(counts)
            if t == 1:
                return next(iter(counts))
            top_w, top_c = None, -1.0
            second_c = -1.0
            for w, c in counts.items():
                if c > top_c:
                    second_c = top_c
                    top_w, top_c = w, c
                elif c > second_c:
                    second_c = c
            if top_c - second_c > t:
                return top_w
            break
        sig = tuple(keys)
        cached = self._argmax_cache.get(sig)
        if cached is not None:
            return cached
        best = int(np.argmax(self.dist(keys)))
        if len(self._argmax_cache) > 1_000_000:
            self._argmax_cache.clear()
        self._argmax_cache[sig] = best
        return best

    # -- merging / serialization -------------------------------------------

    @staticmethod
    def merged(parts: Sequence[tuple["_CountTables", float]]) -> "_CountTables":
        live = [(ct, w) for ct, w in parts if w > 0]
        if not live:
            raise ConfigError("merge requires at least one positive weight")
        v = live[0][0].vocab_size
        n_levels = len(live[0][0].tables)
        if any(ct.vocab_size != v or len(ct.tables) != n_levels for ct, _ in live):
            raise ConfigError("cannot merge models with different shapes")
        out = _CountTables(v, n_levels)
        for ct, weight in live:
            out.unigram_total += weight * ct.unigram_total
            for w, c in ct.unigram.items():
                out.unigram[w] = out.unigram.get(w, 0) + weight * c
            for dst, src in zip(out.tables, ct.tables):
                for key, (tot, counts) in src.items():
                    cell = dst.get(key)
                    if cell is None:
                        dst[key] = [weight * tot, {w: weight * c for w, c in counts.items()}]
                    else:
                        cell[0] += weight * tot
                        dcounts = cell[1]
                        for w, c in counts.items():
                            dcounts[w] = dcounts.get(w, 0) + weight * c
        return out

    def to_dict(self) -> dict:
        return {
            "vocab_size": self.vocab_size,
            "unigram_total": self.unigram_total,
            "unigram": {str(w): c for w, c in self.unigram.items()},
            "tables": [
                {str(key): [tot, {str(w): c for w, c in counts.items()}]
                 for key, (tot, counts) in table.items()}
                for table in self.tables
            ],
        }

    @staticmethod
    def from_dict(data: dict) -> "_CountTables":
        out = _CountTables(data["vocab_size"], len(data["tables"]))
        out.unigram_total = data["unigram_total"]
        out.unigram = {int(w): c for w, c in data["unigram"].items()}
        out.tables = [
            {int(key): [tot, {int(w): c for w, c in counts.items()}]
             for key, (tot, counts) in table.items()}
            for table in data["tables"]
        ]
        return out


class WittenBellLm:
    """Interpolated Witten-Bell n-gram model over orders 1..order.

    An instance built with no data is the uniform model: every query returns
    1/V. Sequence starts are padded with PAD so contexts have fixed length.
    """

    FORMAT = "causalmdl-lm/1"

    def __init__(self, vocab_size: int, config: LmConfig,
                 _counts: _CountTables | None = None):
        self.vocab_size = vocab_size
        self.config = config
        self._counts = _counts if _counts is not None else _CountTables(
            vocab_size, config.order - 1)

    def _context_keys(self, padded: Sequence[int], pos: int) -> list[int]:
        # keys for context lengths 1..order-1 ending just before padded[pos]
        b = self.vocab_size
        keys = []
        key = 0
        mult = 1
        for k in range(1, self.config.order):
            key += mult * padded[pos - k]
            mult *= b
            keys.append(key)
        return keys

    def fit(self, sequences: Iterable[TokenSeq | Sequence[int]]) -> "WittenBellLm":
        pad = (PAD_ID,) * (self.config.order - 1)
        add = self._counts.add
        for seq in sequences:
            toks = _tokens(seq)
            _check_ids(toks, self.vocab_size, "sequence")
            padded = pad + toks
            for i in range(len(toks)):
                pos = i + len(pad)
                add(padded[pos], self._context_keys(padded, pos))
        return self

    def prob(self, token: int, history: Sequence[int] = ()) -> float:
        """p(token | last order-1 tokens of history), PAD-padded."""
        _check_ids([token], self.vocab_size, "token")
        hist = (PAD_ID,) * (self.config.order - 1) + _tokens(history)
        return self._counts.prob(token, self._context_keys(hist, len(hist)))

    def next_token_dist(self, history: Sequence[int] = ()) -> np.ndarray:
        hist = (PAD_ID,) * (self.config.order - 1) + _tokens(history)
        return self._counts.dist(self._context_keys(hist, len(hist)))

    def codelength(self, seq: TokenSeq | Sequence[int], allow_empty: bool = False) -> float:
        """Total bits sum(-log2 p(token | history)) over the sequence."""
        toks = _tokens(seq)
        if not toks:
            if allow_empty:
                return 0.0
            raise InputError("refusing codelength of an empty sequence")
        _check_ids(toks, self.vocab_size, "sequence")
        pad = (PAD_ID,) * (self.config.order - 1)
        padded = pad + toks
        counts = self._counts
        bits = 0.0
        for i in range(len(toks)):
            pos = i + len(pad)
            bits -= math.log(counts.prob(padded[pos], self._context_keys(padded, pos)))
        return bits / _LOG2

    def to_dict(self) -> dict:
        return {"format": self.FORMAT, "order": self.config.order,
                "smoothing": self.config.smoothing.value,
                "counts": self._counts.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "WittenBellLm":
        if data.get("format") != cls.FORMAT:
            raise InputError(f"unsupported model format: {data.get('format')!r}")
        config = LmConfig(order=data["order"], smoothing=Smoothing(data["smoothing"]))
        counts = _CountTables.from_dict(data["counts"])
        return cls(counts.vocab_size, config, _counts=counts)


def _channel_levels(config: ChannelConfig) -> list[tuple[int, int]]:
    """Backoff levels (source half-width, history length), coarse to fine."""
    k, w = config.target_history, config.source_window
    levels = [(0, hk) for hk in range(0, k + 1)]          # centered token, growing history
    levels += [(wi, k) for wi in range(1, w + 1)]          # widen the window last
    return levels


class ChannelModel:
    """Position-aligned conditional model of target tokens given a source window
    and recent target history. Out-of-range positions on either side read PAD."""

    FORMAT = "causalmdl-channel/1"

    def __init__(self, src_vocab_size: int, tgt_vocab_size: int, config: ChannelConfig,
                 _counts: _CountTables | None = None):
        self.src_vocab_size = src_vocab_size
        self.tgt_vocab_size = tgt_vocab_size
        self.config = config
        self._levels = _channel_levels(config)
        self._base = max(src_vocab_size, tgt_vocab_size)
        self._counts = _counts if _counts is not None else _CountTables(
            tgt_vocab_size, len(self._levels))

    def _context_keys(self, src: Sequence[int], pos: int, hist: Sequence[int]) -> list[int]:
        """Packed keys for every backoff level at target position ``pos``.

        ``hist`` is the target history ending at pos (PAD-padded, length k).
        """
        b = self._base
        ls = len(src)
        keys = []
        for wi, hk in self._levels:
            key = 0
            for j in range(pos - wi, pos + wi + 1):
                key = key * b + (src[j] if 0 <= j < ls else PAD_ID)
            for h in range(hk):
                key = key * b + hist[len(hist) - hk + h]
            keys.append(key)
        return keys

    def _padded_hist(self, tgt: Sequence[int], pos: int) -> tuple[int, ...]:
        k = self.config.target_history
        out = []
        for j in range(pos - k, pos):
            out.append(tgt[j] if j >= 0 else PAD_ID)
        return tuple(out)

    def fit(self, pairs: Iterable) -> "ChannelModel":
        add = self._counts.add
        for pair in pairs:
            src, tgt = _pair_tokens(pair)
            _check_ids(src, self.src_vocab_size, "source sequence")
            _check_ids(tgt, self.tgt_vocab_size, "target sequence")
            for t in range(len(tgt)):
                add(tgt[t], self._context_keys(src, t, self._padded_hist(tgt, t)))
        return self

    def prob(self, token: int, src: Sequence[int], pos: int,
             history: Sequence[int]) -> float:
        """p(token at target position pos | source window, emitted history)."""
        src = _tokens(src)
        hist = self._padded_hist(_tokens(history), len(_tokens(history)))
        return self._counts.prob(token, self._context_keys(src, pos, hist))

    def next_token_dist(self, src: Sequence[int], pos: int,
                        history: Sequence[int]) -> np.ndarray:
        src = _tokens(src)
        hist = self._padded_hist(_tokens(history), len(_tokens(history)))
        return self._counts.dist(self._context_keys(src, pos, hist))

    def codelength(self, src: TokenSeq | Sequence[int], tgt: TokenSeq | Sequence[int],
                   allow_empty: bool = False) -> float:
        """Bits to code tgt given src; target length itself is not coded."""
        src_t, tgt_t = _tokens(src), _tokens(tgt)
        if not tgt_t:
            if allow_empty:
                return 0.0
            raise InputError("refusing codelength of an empty sequence")
        _check_ids(src_t, self.src_vocab_size, "source sequence")
        _check_ids(tgt_t, self.tgt_vocab_size, "target sequence")
        counts = self._counts
        bits = 0.0
        for t in range(len(tgt_t)):
            p = counts.prob(tgt_t[t], self._context_keys(src_t, t, self._padded_hist(tgt_t, t)))
            bits -= math.log(p)
        return bits / _LOG2

    def decode(self, src: TokenSeq | Sequence[int]) -> TokenSeq:
        """Greedy left-to-right argmax emitting exactly len(src) tokens."""
        src_t = _tokens(src)
        if not src_t:
            raise InputError("cannot decode an empty source sequence")
        _check_ids(src_t, self.src_vocab_size, "source sequence")
        counts = self._counts
        k = self.config.target_history
        out: list[int] = []
        for t in range(len(src_t)):
            hist = tuple(out[t - k + j] if t - k + j >= 0 else PAD_ID for j in range(k))
            out.append(counts.argmax(self._context_keys(src_t, t, hist)))
        return TokenSeq(tuple(out))

    def merged_with(self, other: "ChannelModel", weight_self: float,
                    weight_other: float) -> "ChannelModel":
        """New model whose counts are the weighted sum of both models' counts."""
        if self.config != other.config:
            raise ConfigError("cannot merge channel models with different configs")
        if (self.src_vocab_size, self.tgt_vocab_size) != (other.src_vocab_size,
                                                          other.tgt_vocab_size):
            raise ConfigError("cannot merge channel models over different vocabularies")
        counts = _CountTables.merged([(self._counts, weight_self),
                                      (other._counts, weight_other)])
        return ChannelModel(self.src_vocab_size, self.tgt_vocab_size, self.config,
                            _counts=counts)

    def to_dict(self) -> dict:
        return {"format": self.FORMAT,
                "src_vocab_size": self.src_vocab_size,
                "tgt_vocab_size": self.tgt_vocab_size,
                "target_history": self.config.target_history,
                "source_window": self.config.source_window,
                "smoothing": self.config.smoothing.value,
                "counts": self._counts.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "ChannelModel":
        if data.get("format") != cls.FORMAT:
            raise InputError(f"unsupported model format: {data.get('format')!r}")
        config = ChannelConfig(target_history=data["target_history"],
                               source_window=data["source_window"],
                               smoothing=Smoothing(data["smoothing"]))
        counts = _CountTables.from_dict(data["counts"])
        return cls(data["src_vocab_size"], data["tgt_vocab_size"], config, _counts=counts)


def _pair_tokens(pair) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if hasattr(pair, "src"):
        return _tokens(pair.src), _tokens(pair.tgt)
    src, tgt = pair
    return _tokens(src), _tokens(tgt)


# -- module-level operations --------------------------------------------------

def train_lm(sequences: Sequence, vocab: Vocabulary,
             config: LmConfig | None = None) -> WittenBellLm:
    if not sequences:
        raise InputError("cannot train a language model on an empty training set")
    cfg = config if config is not None else LmConfig()
    return WittenBellLm(vocab.size, cfg).fit(sequences)


def uniform_lm(vocab: Vocabulary, config: LmConfig | None = None) -> WittenBellLm:
    """Data-free model assigning 1/V everywhere (the online code's first block)."""
    return WittenBellLm(vocab.size, config if config is not None else LmConfig())


def lm_codelength(model: WittenBellLm, seq: TokenSeq | Sequence[int]) -> float:
    return model.codelength(seq)


def train_channel(pairs: Sequence, src_vocab: Vocabulary, tgt_vocab: Vocabulary,
                  config: ChannelConfig | None = None) -> ChannelModel:
    if not pairs:
        raise InputError("cannot train a channel model on an empty training set")
    cfg = config if config is not None else ChannelConfig()
    return ChannelModel(src_vocab.size, tgt_vocab.size, cfg).fit(pairs)


def uniform_channel(src_vocab: Vocabulary, tgt_vocab: Vocabulary,
                    config: ChannelConfig | None = None) -> ChannelModel:
    return ChannelModel(src_vocab.size, tgt_vocab.size,
                        config if config is not None else ChannelConfig())


def channel_codelength(model: ChannelModel, src, tgt) -> float:
    return model.codelength(src, tgt)


def decode(model: ChannelModel, src: TokenSeq | Sequence[int]) -> TokenSeq:
    return model.decode(src)
