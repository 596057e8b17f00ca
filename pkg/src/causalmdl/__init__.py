"""causalmdl: causal direction inference for paired sequence data via
prequential MDL, plus SSL/DA asymmetry experiments on synthetic
decipherment corpora.
"""

from .corpus import (
    BlockSchedule,
    CorpusSplit,
    DEFAULT_FRACTIONS,
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
from .errors import CausalMdlError, ComputationError, ConfigError, InputError
from .seqmodel import (
    ChannelConfig,
    ChannelModel,
    LmConfig,
    Smoothing,
    WittenBellLm,
    channel_codelength,
    decode,
    lm_codelength,
    train_channel,
    train_lm,
    uniform_channel,
    uniform_lm,
)
from .cipherlab import (
    CipherDatasetSpec,
    NoisedSide,
    NoiseKind,
    NoiseSpec,
    apply_noise,
    derive_seed,
    generate_cipher_dataset,
    load_lines,
    rot13,
    synthetic_lines,
)
from .mdlcode import (
    CodeKind,
    CodedSide,
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
from .evalstats import (
    SummaryStats,
    TestResult,
    char_accuracy,
    corpus_bleu,
    corpus_char_accuracy,
    regularized_incomplete_beta,
    sign_aggregate,
    student_t_cdf,
    student_t_sf,
    welch_t_test,
)
from .experiments import (
    GRID_CHANNEL,
    AdaptationKind,
    DaGridSpec,
    DaResult,
    DaSpec,
    DomainShift,
    GridResult,
    MetricKind,
    SslDataset,
    SslGridSpec,
    SslResult,
    TaskDirection,
    adapt,
    aggregate_da,
    aggregate_ssl,
    family_name,
    make_domain_shift,
    make_ssl_cell,
    pair_set_hash,
    run_da_grid,
    run_ssl_grid,
    self_train,
    train_supervised,
)

__version__ = "0.1.0"
