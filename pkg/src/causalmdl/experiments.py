"""SSL and DA harnesses measuring causal vs. anticausal task asymmetries.

A decipherment corpus keeps the clean side as the cause. CAUSAL task cells
predict the noised side from the clean side, ANTICAUSAL cells the reverse;
both orientations of one cell consume the identical pair set, so any metric
gap is attributable to the task direction alone.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

from .cipherlab import (
    CipherDatasetSpec,
    NoisedSide,
    NoiseSpec,
    derive_seed,
    generate_cipher_dataset,
)
from .corpus import (
    ParallelCorpus,
    TokenizeMode,
    TokenSeq,
    Vocabulary,
    detokenize,
)
from .errors import CausalMdlError, ConfigError, InputError
from .evalstats import corpus_bleu, corpus_char_accuracy
from .seqmodel import ChannelConfig, ChannelModel, train_channel


class TaskDirection(enum.Enum):
    CAUSAL = "causal"          # clean -> noised (predict the effect)
    ANTICAUSAL = "anticausal"  # noised -> clean (predict the cause)


class MetricKind(enum.Enum):
    BLEU = "bleu"
    CHAR_ACCURACY = "char_accuracy"


class AdaptationKind(enum.Enum):
    COUNT_MERGE = "count_merge"
    CONTINUE_TRAIN = "continue_train"


MERGE_LAMBDA_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))
DEV_SLICE_FRACTION = 0.1

# Sized for minutes-scale cells.
DEFAULT_K = 500
DEFAULT_M = 20000
DEFAULT_TEST_N = 1000
DEFAULT_ITERATIONS = 3

# Grid operating point. history=1 keeps the finest channel cells dense enough
# that aligned counts dominate the stray mass INSERT misalignment leaves in
# them; at the ChannelConfig default (history 2) that stray mass can flip
# test-time argmaxes for the clean-input direction, drowning the task-direction
# signal the grids exist to measure.
GRID_CHANNEL = ChannelConfig(target_history=1, source_window=1)


def pair_set_hash(pairs: Sequence) -> str:
    """Orientation-independent digest of a pair collection's surface text."""
    h = hashlib.sha256()
    for key in sorted(_pair_text(p) for p in pairs):
        h.update(key.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()


def _pair_text(pair) -> str:
    src = pair.src.raw if pair.src.raw is not None else " ".join(map(str, pair.src.tokens))
    tgt = pair.tgt.raw if pair.tgt.raw is not None else " ".join(map(str, pair.tgt.tokens))
    return src + "\x1f" + tgt


def _check_disjoint(a: ParallelCorpus, b: ParallelCorpus, what: str) -> None:
    ids = {id(p) for p in a.pairs}
    if any(id(p) in ids for p in b.pairs):
        raise ConfigError(f"{what} must be disjoint")


# -- orientation and scoring ----------------------------------------------------

def oriented_pairs(corpus: ParallelCorpus, direction: TaskDirection
                   ) -> list[tuple[TokenSeq, TokenSeq]]:
    if direction is TaskDirection.CAUSAL:
        return [(p.src, p.tgt) for p in corpus.pairs]
    return [(p.tgt, p.src) for p in corpus.pairs]


def _oriented_vocabs(corpus: ParallelCorpus, direction: TaskDirection
                     ) -> tuple[Vocabulary, Vocabulary, TokenizeMode]:
    if direction is TaskDirection.CAUSAL:
        return corpus.src_vocab, corpus.tgt_vocab, corpus.tgt_mode
    return corpus.tgt_vocab, corpus.src_vocab, corpus.src_mode


def _to_text(seq: TokenSeq, vocab: Vocabulary, mode: TokenizeMode) -> str:
    if seq.raw is not None:
        return seq.raw
    return detokenize(vocab.decode(seq), mode)


def score_model(model: ChannelModel, pairs: Sequence[tuple[TokenSeq, TokenSeq]],
                out_vocab: Vocabulary, out_mode: TokenizeMode,
                metric: MetricKind) -> float:
    """Decode every input and score against references. BLEU is whitespace-word
    level regardless of tokenization; char accuracy is positionwise on text."""
    hyps = []
    refs = []
    for inp, ref in pairs:
        decoded = model.decode(inp)
        hyps.append(detokenize(out_vocab.decode(decoded), out_mode))
        refs.append(_to_text(ref, out_vocab, out_mode))
    if metric is MetricKind.BLEU:
        return corpus_bleu(hyps, refs)
    return corpus_char_accuracy(hyps, refs)


def train_supervised(labeled: ParallelCorpus, test: ParallelCorpus,
                     direction: TaskDirection,
                     config: ChannelConfig | None = None,
                     metric: MetricKind = MetricKind.BLEU
                     ) -> tuple[ChannelModel, float]:
    """Channel model on the labeled pairs alone, scored on the test set."""
    cfg = config if config is not None else ChannelConfig()
    in_vocab, out_vocab, out_mode = _oriented_vocabs(labeled, direction)
    model = train_channel(oriented_pairs(labeled, direction), in_vocab, out_vocab, cfg)
    metric_value = score_model(model, oriented_pairs(test, direction),
                               out_vocab, out_mode, metric)
    return model, metric_value


# -- SSL -------------------------------------------------------------------------

@dataclass(frozen=True)
class SslDataset:
    labeled: ParallelCorpus
    unlabeled_inputs: tuple[TokenSeq, ...]  # already on the model's input side
    test: ParallelCorpus
    task_direction: TaskDirection
    family: str = ""
    seed: int = 0
    pair_hash: str = ""  # digest of the underlying (clean, noised) pair set

    def __post_init__(self):
        _check_disjoint(self.labeled, self.test, "labeled and test sets")

    @property
    def k(self) -> int:
        return len(self.labeled)

    @property
    def m(self) -> int:
        return len(self.unlabeled_inputs)


@dataclass(frozen=True)
class SslResult:
    family: str
    direction: TaskDirection
    seed: int
    k: int
    m: int
    iterations: int
    supervised_metric: float
    ssl_metric: float
    delta_ssl: float
    metric: MetricKind
    config_fingerprint: str

    def __post_init__(self):
        if self.delta_ssl != self.ssl_metric - self.supervised_metric:
            raise ConfigError("delta_ssl must equal ssl_metric - supervised_metric")


def self_train(ssl: SslDataset, config: ChannelConfig | None = None,
               iterations: int = DEFAULT_ITERATIONS,
               metric: MetricKind = MetricKind.BLEU,
               min_confidence: float | None = None) -> SslResult:
    """Iterated pseudo-labeling: train on labeled + pseudo pairs, relabel all
    unlabeled inputs with the current model, repeat. With no unlabeled data
    the loop degenerates to the supervised baseline and delta is exactly 0.
    """
    if iterations < 1:
        raise ConfigError(f"iterations must be >= 1, got {iterations}")
    cfg = config if config is not None else ChannelConfig()
    direction = ssl.task_direction
    in_vocab, out_vocab, out_mode = _oriented_vocabs(ssl.labeled, direction)
    labeled_pairs = oriented_pairs(ssl.labeled, direction)
    test_pairs = oriented_pairs(ssl.test, direction)

    model = train_channel(labeled_pairs, in_vocab, out_vocab, cfg)
    supervised_metric = score_model(model, test_pairs, out_vocab, out_mode, metric)

    if ssl.unlabeled_inputs:
        for _ in range(iterations):
            pseudo = [(inp, model.decode(inp)) for inp in ssl.unlabeled_inputs]
            if min_confidence is not None:
                pseudo = [(inp, out) for inp, out in pseudo
                          if 2.0 ** (-model.codelength(inp, out) / len(out)) >= min_confidence]
            model = train_channel(labeled_pairs + pseudo, in_vocab, out_vocab, cfg)
        ssl_metric = score_model(model, test_pairs, out_vocab, out_mode, metric)
    else:
        ssl_metric = supervised_metric

    return SslResult(
        family=ssl.family, direction=direction, seed=ssl.seed,
        k=ssl.k, m=ssl.m, iterations=iterations,
        supervised_metric=supervised_metric, ssl_metric=ssl_metric,
        delta_ssl=ssl_metric - supervised_metric,
        metric=metric, config_fingerprint=cfg.fingerprint(),
    )


def family_name(side: NoisedSide) -> str:
    return "En→Cipher" if side is NoisedSide.CIPHERTEXT else "Cipher→En"


def make_ssl_cell(lines: Sequence[str], family: NoisedSide,
                  direction: TaskDirection, seed: int,
                  k: int = DEFAULT_K, m: int = DEFAULT_M,
                  test_n: int = DEFAULT_TEST_N,
                  noise: NoiseSpec | None = None,
                  mode: TokenizeMode = TokenizeMode.CHAR) -> SslDataset:
    """One experiment cell. The corpus, its noise, and the k/m/test split are
    all derived from (family, seed) only, so the CAUSAL and ANTICAUSAL cells
    of one (family, seed) share the identical underlying pair set.
    """
    n = k + m + test_n
    if len(lines) < n:
        raise InputError(f"need {n} lines for k={k}, m={m}, test={test_n}; got {len(lines)}")
    if k < 1:
        raise ConfigError(f"need k >= 1 labeled pairs, got {k}")
    data_seed = derive_seed("ssl-cell", family.value, seed)
    base_noise = noise if noise is not None else NoiseSpec()
    spec = CipherDatasetSpec(
        lines=tuple(lines[:n]),
        noised_side=family,
        noise=replace(base_noise, rng_seed=derive_seed(data_seed, base_noise.rng_seed)),
        mode=mode,
    )
    corpus = generate_cipher_dataset(spec)
    order = list(range(n))
    random.Random(derive_seed(data_seed, "split")).shuffle(order)
    labeled = corpus.take(sorted(order[:k]), name=f"{corpus.name}/labeled")
    unlabeled = [corpus.pairs[i] for i in sorted(order[k:k + m])]
    test = corpus.take(sorted(order[k + m:n]), name=f"{corpus.name}/test")
    if direction is TaskDirection.CAUSAL:
        unlabeled_inputs = tuple(p.src for p in unlabeled)
    else:
        unlabeled_inputs = tuple(p.tgt for p in unlabeled)
    digest = pair_set_hash(list(labeled.pairs) + unlabeled + list(test.pairs))
    return SslDataset(labeled=labeled, unlabeled_inputs=unlabeled_inputs, test=test,
                      task_direction=direction, family=family_name(family),
                      seed=seed, pair_hash=digest)


# -- DA --------------------------------------------------------------------------

@dataclass(frozen=True)
class DomainShift:
    source: ParallelCorpus
    target: ParallelCorpus
    source_line_indices: tuple[int, ...]
    target_line_indices: tuple[int, ...]


def _mechanism_params(spec: NoiseSpec) -> tuple:
    # What defines the noising mechanism; rng_seed only picks a realization.
    return (spec.p, tuple(sorted(k.value for k in spec.enabled)), spec.mask_symbol)


def make_domain_shift(lines: Sequence[str], source_noise: NoiseSpec,
                      target_noise: NoiseSpec, seed: int,
                      noised_side: NoisedSide = NoisedSide.CIPHERTEXT,
                      mode: TokenizeMode = TokenizeMode.CHAR,
                      source_n: int | None = None,
                      target_n: int | None = None,
                      target_lines: Sequence[str] | None = None) -> DomainShift:
    """Two corpora over disjoint line subsets with (typically) different noise.

    Both corpora share vocabularies, built over the union, so their models
    can be count-merged. With a single ``lines`` pool the domains take
    disjoint index subsets, which already constitutes a shift even under
    equal noise; an explicit ``target_lines`` pool is rejected only when it
    equals ``lines`` AND the noise mechanisms are identical (no shift at all).
    """
    if target_lines is not None and tuple(target_lines) == tuple(lines) \
            and _mechanism_params(source_noise) == _mechanism_params(target_noise):
        raise InputError("no domain shift: identical noise parameters over identical lines")
    if target_lines is None:
        n = len(lines)
        if source_n is None:
            source_n = n // 2
        if target_n is None:
            target_n = n - source_n
        if source_n < 1 or target_n < 1 or source_n + target_n > n:
            raise InputError(
                f"insufficient lines: need source_n + target_n <= {n}, "
                f"got {source_n} + {target_n}")
        order = list(range(n))
        random.Random(derive_seed("domain-shift", seed)).shuffle(order)
        src_idx = tuple(sorted(order[:source_n]))
        tgt_idx = tuple(sorted(order[source_n:source_n + target_n]))
        src_lines = tuple(lines[i] for i in src_idx)
        tgt_lines = tuple(lines[i] for i in tgt_idx)
    else:
        src_idx, src_lines = _subset(lines, source_n, derive_seed("domain-shift", seed, "s"))
        tgt_idx, tgt_lines = _subset(target_lines, target_n,
                                     derive_seed("domain-shift", seed, "t"))

    base = family_name(noised_side)
    source_spec = CipherDatasetSpec(
        lines=src_lines, noised_side=noised_side,
        noise=replace(source_noise, rng_seed=derive_seed(seed, "source", source_noise.rng_seed)),
        mode=mode, name=f"{base}/source-domain")
    target_spec = CipherDatasetSpec(
        lines=tgt_lines, noised_side=noised_side,
        noise=replace(target_noise, rng_seed=derive_seed(seed, "target", target_noise.rng_seed)),
        mode=mode, name=f"{base}/target-domain")
    source = generate_cipher_dataset(source_spec)
    target = generate_cipher_dataset(target_spec)
    return DomainShift(*_share_vocabs(source, target),
                       source_line_indices=src_idx, target_line_indices=tgt_idx)


def _subset(pool: Sequence[str], n: int | None, seed: int
            ) -> tuple[tuple[int, ...], tuple[str, ...]]:
    """Seeded choice of n positions from a line pool (all of it when n is None)."""
    if n is None:
        idx = tuple(range(len(pool)))
    else:
        if n < 1 or n > len(pool):
            raise InputError(f"insufficient lines: need 1 <= n <= {len(pool)}, got {n}")
        order = list(range(len(pool)))
        random.Random(seed).shuffle(order)
        idx = tuple(sorted(order[:n]))
    return idx, tuple(pool[i] for i in idx)


def _share_vocabs(a: ParallelCorpus, b: ParallelCorpus
                  ) -> tuple[ParallelCorpus, ParallelCorpus]:
    """Re-encode both corpora over union vocabularies (a's symbols first)."""
    pad, mask = a.src_vocab.pad_symbol, a.src_vocab.mask_symbol
    src_vocab = Vocabulary(
        (s for corpus in (a, b) for seq in corpus.pairs
         for s in corpus.src_vocab.decode(seq.src)), pad, mask)
    tgt_vocab = Vocabulary(
        (s for corpus in (a, b) for seq in corpus.pairs
         for s in corpus.tgt_vocab.decode(seq.tgt)), pad, mask)

    def reencode(corpus: ParallelCorpus) -> ParallelCorpus:
        pairs = tuple(
            type(p)(
                src=src_vocab.encode(corpus.src_vocab.decode(p.src), raw=p.src.raw),
                tgt=tgt_vocab.encode(corpus.tgt_vocab.decode(p.tgt), raw=p.tgt.raw),
                direction=p.direction,
            )
            for p in corpus.pairs)
        return ParallelCorpus(pairs=pairs, direction=corpus.direction,
                              src_vocab=src_vocab, tgt_vocab=tgt_vocab,
                              name=corpus.name, src_mode=corpus.src_mode,
                              tgt_mode=corpus.tgt_mode)

    return reencode(a), reencode(b)


@dataclass(frozen=True)
class DaSpec:
    source_train: ParallelCorpus
    target_adapt: ParallelCorpus | None  # None = empty adaptation set
    target_test: ParallelCorpus
    adaptation: AdaptationKind = AdaptationKind.COUNT_MERGE
    task_direction: TaskDirection = TaskDirection.CAUSAL
    merge_lambda: float | None = None  # None = sweep on a dev slice
    family: str = ""
    seed: int = 0

    def __post_init__(self):
        if self.merge_lambda is not None and not 0.0 <= self.merge_lambda <= 1.0:
            raise ConfigError(f"merge lambda must be in [0,1], got {self.merge_lambda}")
        if self.target_adapt is not None:
            _check_disjoint(self.target_adapt, self.target_test,
                            "target_adapt and target_test")
            if self.target_adapt.src_vocab != self.source_train.src_vocab or \
                    self.target_adapt.tgt_vocab != self.source_train.tgt_vocab:
                raise ConfigError("DA corpora must share vocabularies")


@dataclass(frozen=True)
class DaResult:
    family: str
    direction: TaskDirection
    seed: int
    adaptation: AdaptationKind
    unadapted_metric: float
    adapted_metric: float
    delta_da: float
    lambda_selected: float | None
    metric: MetricKind
    config_fingerprint: str

    def __post_init__(self):
        if self.delta_da != self.adapted_metric - self.unadapted_metric:
            raise ConfigError("delta_da must equal adapted_metric - unadapted_metric")


def adapt(spec: DaSpec, config: ChannelConfig | None = None,
          metric: MetricKind = MetricKind.BLEU) -> DaResult:
    """Score a source-domain model on the target test set before and after
    adaptation on the (small) target adaptation corpus."""
    cfg = config if config is not None else ChannelConfig()
    direction = spec.task_direction
    in_vocab, out_vocab, out_mode = _oriented_vocabs(spec.source_train, direction)
    source_model = train_channel(oriented_pairs(spec.source_train, direction),
                                 in_vocab, out_vocab, cfg)
    test_pairs = oriented_pairs(spec.target_test, direction)
    unadapted = score_model(source_model, test_pairs, out_vocab, out_mode, metric)

    if spec.target_adapt is None:
        adapted_model, lam = source_model, None
        adapted = unadapted
    elif spec.adaptation is AdaptationKind.CONTINUE_TRAIN:
        target_model = train_channel(oriented_pairs(spec.target_adapt, direction),
                                     in_vocab, out_vocab, cfg)
        adapted_model, lam = source_model.merged_with(target_model, 1.0, 1.0), None
        adapted = score_model(adapted_model, test_pairs, out_vocab, out_mode, metric)
    else:
        adapted_model, lam = _count_merge(spec, source_model, cfg, metric,
                                          in_vocab, out_vocab, out_mode)
        adapted = score_model(adapted_model, test_pairs, out_vocab, out_mode, metric)

    return DaResult(
        family=spec.family, direction=direction, seed=spec.seed,
        adaptation=spec.adaptation,
        unadapted_metric=unadapted, adapted_metric=adapted,
        delta_da=adapted - unadapted, lambda_selected=lam,
        metric=metric, config_fingerprint=cfg.fingerprint(),
    )


def _count_merge(spec: DaSpec, source_model: ChannelModel, cfg: ChannelConfig,
                 metric: MetricKind, in_vocab, out_vocab, out_mode
                 ) -> tuple[ChannelModel, float]:
    """Merge source and target counts at weight (1-lambda, lambda); lambda is
    taken from merge_lambda or swept on the trailing dev slice of target_adapt."""
    adapt_pairs = oriented_pairs(spec.target_adapt, spec.task_direction)
    if spec.merge_lambda is not None:
        target_model = train_channel(adapt_pairs, in_vocab, out_vocab, cfg)
        lam = spec.merge_lambda
        return source_model.merged_with(target_model, 1.0 - lam, lam), lam
    dev_n = max(1, round(DEV_SLICE_FRACTION * len(adapt_pairs)))
    train_pairs = adapt_pairs[:-dev_n]
    dev_pairs = adapt_pairs[-dev_n:]
    if not train_pairs:  # adaptation set too small to hold anything out
        train_pairs = adapt_pairs
    target_model = train_channel(train_pairs, in_vocab, out_vocab, cfg)
    best_lam = MERGE_LAMBDA_GRID[0]
    best_score = -math.inf
    for lam in MERGE_LAMBDA_GRID:
        candidate = source_model.merged_with(target_model, 1.0 - lam, lam)
        score = score_model(candidate, dev_pairs, out_vocab, out_mode, metric)
        if score > best_score:
            best_score, best_lam = score, lam
    # Refit on all of target_adapt at the selected weight.
    full_target = train_channel(adapt_pairs, in_vocab, out_vocab, cfg)
    return source_model.merged_with(full_target, 1.0 - best_lam, best_lam), best_lam


# -- grids -----------------------------------------------------------------------

@dataclass(frozen=True)
class SslGridSpec:
    families: tuple[NoisedSide, ...] = (NoisedSide.CIPHERTEXT, NoisedSide.SOURCE_TEXT)
    directions: tuple[TaskDirection, ...] = (TaskDirection.CAUSAL, TaskDirection.ANTICAUSAL)
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    k: int = DEFAULT_K
    m: int = DEFAULT_M
    test_n: int = DEFAULT_TEST_N
    iterations: int = DEFAULT_ITERATIONS
    noise_p: float = 0.05
    mode: TokenizeMode = TokenizeMode.CHAR
    metric: MetricKind = MetricKind.BLEU
    channel: ChannelConfig = GRID_CHANNEL

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("need at least one seed")


@dataclass(frozen=True)
class GridResult:
    rows: tuple
    errors: tuple[tuple[str, str], ...] = ()  # (cell id, message)


def _ssl_cell_id(family: NoisedSide, direction: TaskDirection, seed: int) -> str:
    return f"{family_name(family)}|{direction.value}|{seed}"


def _run_ssl_cell(args) -> tuple[str, SslResult | None, str | None]:
    lines, family, direction, seed, spec = args
    cell = _ssl_cell_id(family, direction, seed)
    try:
        dataset = make_ssl_cell(lines, family, direction, seed,
                                k=spec.k, m=spec.m, test_n=spec.test_n,
                                noise=NoiseSpec(p=spec.noise_p), mode=spec.mode)
        result = self_train(dataset, config=spec.channel,
                            iterations=spec.iterations, metric=spec.metric)
        return cell, result, None
    except CausalMdlError as exc:
        return cell, None, str(exc)


def run_ssl_grid(lines: Sequence[str], spec: SslGridSpec | None = None,
                 jobs: int = 1) -> GridResult:
    """One SslResult per (family, direction, seed), canonical cell order.

    Cells are independent; jobs > 1 runs them on a process pool without
    changing results or ordering. Per-cell failures are collected, not fatal.
    """
    grid = spec if spec is not None else SslGridSpec()
    cells = [(list(lines), family, direction, seed, grid)
             for family in grid.families
             for direction in grid.directions
             for seed in grid.seeds]
    outcomes = _map_cells(_run_ssl_cell, cells, jobs)
    rows = tuple(res for _, res, _ in outcomes if res is not None)
    errors = tuple((cell, err) for cell, _, err in outcomes if err is not None)
    return GridResult(rows=rows, errors=errors)


@dataclass(frozen=True)
class DaGridSpec:
    directions: tuple[TaskDirection, ...] = (TaskDirection.CAUSAL, TaskDirection.ANTICAUSAL)
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    family: NoisedSide = NoisedSide.CIPHERTEXT
    source_p: float = 0.05
    target_p: float = 0.15
    source_n: int = 4000
    adapt_n: int = 500
    test_n: int = 500
    adaptation: AdaptationKind = AdaptationKind.COUNT_MERGE
    mode: TokenizeMode = TokenizeMode.CHAR
    metric: MetricKind = MetricKind.BLEU
    channel: ChannelConfig = GRID_CHANNEL

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("need at least one seed")


def _da_cell_id(family: NoisedSide, direction: TaskDirection, seed: int) -> str:
    return f"{family_name(family)}|{direction.value}|{seed}"


def _run_da_cell(args) -> tuple[str, DaResult | None, str | None]:
    lines, direction, seed, spec = args
    cell = _da_cell_id(spec.family, direction, seed)
    try:
        shift = make_domain_shift(
            lines,
            source_noise=NoiseSpec(p=spec.source_p),
            target_noise=NoiseSpec(p=spec.target_p),
            seed=derive_seed("da-cell", seed),
            noised_side=spec.family, mode=spec.mode,
            source_n=spec.source_n, target_n=spec.adapt_n + spec.test_n)
        order = list(range(len(shift.target)))
        random.Random(derive_seed("da-split", seed)).shuffle(order)
        target_adapt = shift.target.take(sorted(order[:spec.adapt_n]),
                                         name=f"{shift.target.name}/adapt")
        target_test = shift.target.take(sorted(order[spec.adapt_n:]),
                                        name=f"{shift.target.name}/test")
        da_spec = DaSpec(source_train=shift.source, target_adapt=target_adapt,
                         target_test=target_test, adaptation=spec.adaptation,
                         task_direction=direction,
                         family=family_name(spec.family), seed=seed)
        result = adapt(da_spec, config=spec.channel, metric=spec.metric)
        return cell, result, None
    except CausalMdlError as exc:
        return cell, None, str(exc)


def run_da_grid(lines: Sequence[str], spec: DaGridSpec | None = None,
                jobs: int = 1) -> GridResult:
    grid = spec if spec is not None else DaGridSpec()
    need = grid.source_n + grid.adapt_n + grid.test_n
    if len(lines) < need:
        raise InputError(f"need {need} lines for the DA grid, got {len(lines)}")
    cells = [(list(lines), direction, seed, grid)
             for direction in grid.directions
             for seed in grid.seeds]
    outcomes = _map_cells(_run_da_cell, cells, jobs)
    rows = tuple(res for _, res, _ in outcomes if res is not None)
    errors = tuple((cell, err) for cell, _, err in outcomes if err is not None)
    return GridResult(rows=rows, errors=errors)


def _map_cells(fn: Callable, cells: list, jobs: int) -> list:
    if jobs <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=min(jobs, len(cells))) as pool:
        return list(pool.map(fn, cells))


# -- result tables ---------------------------------------------------------------

SSL_CSV_COLUMNS = ("family", "direction", "seed", "k", "m",
                   "supervised", "augmented", "delta")
DA_CSV_COLUMNS = ("family", "direction", "seed", "adaptation",
                  "unadapted", "adapted", "delta", "lambda")


def ssl_rows_to_csv(rows: Sequence[SslResult], path: str | Path) -> None:
    ordered = sorted(rows, key=lambda r: (r.family, r.direction.value, r.seed))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SSL_CSV_COLUMNS)
        for r in ordered:
            writer.writerow([r.family, r.direction.value, r.seed, r.k, r.m,
                             repr(r.supervised_metric), repr(r.ssl_metric),
                             repr(r.delta_ssl)])


def da_rows_to_csv(rows: Sequence[DaResult], path: str | Path) -> None:
    ordered = sorted(rows, key=lambda r: (r.family, r.direction.value, r.seed))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(DA_CSV_COLUMNS)
        for r in ordered:
            writer.writerow([r.family, r.direction.value, r.seed,
                             r.adaptation.value, repr(r.unadapted_metric),
                             repr(r.adapted_metric), repr(r.delta_da),
                             "" if r.lambda_selected is None else repr(r.lambda_selected)])


def read_ssl_csv(path: str | Path) -> list[dict]:
    """Rows back as dicts with numeric fields parsed; inverse of ssl_rows_to_csv."""
    return _read_csv(path, SSL_CSV_COLUMNS,
                     int_fields=("seed", "k", "m"),
                     float_fields=("supervised", "augmented", "delta"))


def read_da_csv(path: str | Path) -> list[dict]:
    return _read_csv(path, DA_CSV_COLUMNS,
                     int_fields=("seed",),
                     float_fields=("unadapted", "adapted", "delta"))


def _read_csv(path: str | Path, columns: tuple[str, ...],
              int_fields: tuple[str, ...], float_fields: tuple[str, ...]) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise InputError(f"results file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != columns:
            raise InputError(f"{path}: expected columns {columns}, got {reader.fieldnames}")
        rows = []
        for rec in reader:
            for f in int_fields:
                rec[f] = int(rec[f])
            for f in float_fields:
                rec[f] = float(rec[f])
            rows.append(rec)
    return rows


def _group_stats(values: Sequence[float]) -> dict:
    n = len(values)
    mean = sum(values) / n
    if n >= 2:
        std = math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))
    else:
        std = 0.0
    return {"n": n, "mean": mean, "std": std}


def aggregate_ssl(rows: Sequence[SslResult | dict]) -> dict:
    """Per-(family, direction) stats plus the per-family anticausal-vs-causal
    sign tally over seed-matched delta pairs."""
    recs = [_ssl_rec(r) for r in rows]
    return _aggregate(recs, value="delta", extra_means=("supervised", "augmented"),
                      first_group="anticausal", second_group="causal")


def aggregate_da(rows: Sequence[DaResult | dict]) -> dict:
    """As aggregate_ssl, with the causal group expected to win."""
    recs = [_da_rec(r) for r in rows]
    return _aggregate(recs, value="delta", extra_means=("unadapted", "adapted"),
                      first_group="causal", second_group="anticausal")


def _ssl_rec(r) -> dict:
    if isinstance(r, dict):
        return r
    return {"family": r.family, "direction": r.direction.value, "seed": r.seed,
            "supervised": r.supervised_metric, "augmented": r.ssl_metric,
            "delta": r.delta_ssl}


def _da_rec(r) -> dict:
    if isinstance(r, dict):
        return r
    return {"family": r.family, "direction": r.direction.value, "seed": r.seed,
            "unadapted": r.unadapted_metric, "adapted": r.adapted_metric,
            "delta": r.delta_da}


def _aggregate(recs: list[dict], value: str, extra_means: tuple[str, ...],
               first_group: str, second_group: str) -> dict:
    from .evalstats import sign_aggregate

    groups: dict[tuple[str, str], list[dict]] = {}
    for rec in recs:
        groups.setdefault((rec["family"], rec["direction"]), []).append(rec)
    out: dict = {"groups": {}, "orderings": {}}
    for (family, direction), members in sorted(groups.items()):
        entry = _group_stats([m[value] for m in members])
        for f in extra_means:
            entry[f"mean_{f}"] = sum(m[f] for m in members) / len(members)
        out["groups"][f"{family}|{direction}"] = entry
    families = sorted({rec["family"] for rec in recs})
    for family in families:
        a = {r["seed"]: r[value] for r in recs
             if r["family"] == family and r["direction"] == first_group}
        b = {r["seed"]: r[value] for r in recs
             if r["family"] == family and r["direction"] == second_group}
        shared = sorted(set(a) & set(b))
        if not shared:
            continue
        wins_a, wins_b, ties = sign_aggregate([(a[s], b[s]) for s in shared])
        out["orderings"][family] = {
            "value": value,
            f"wins_{first_group}": wins_a,
            f"wins_{second_group}": wins_b,
            "ties": ties,
            "seeds": shared,
        }
    return out
