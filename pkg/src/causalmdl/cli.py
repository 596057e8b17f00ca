"""Command-line orchestration.

Every subcommand resolves its flags (optionally overridden by a JSON config
file) into a flat config dict; the sha256 fingerprint of that dict's
canonical JSON is embedded in all JSON outputs, alongside the seed, so any
artifact can be traced to the exact invocation that produced it. All
outputs are deterministic: rerunning with an equal fingerprint yields
byte-identical files.

Exit codes: 0 success, 2 input error, 3 configuration error,
4 computation error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .cipherlab import (
    ALL_NOISE,
    CipherDatasetSpec,
    NoisedSide,
    NoiseKind,
    NoiseSpec,
    derive_seed,
    generate_cipher_dataset,
    load_lines,
    synthetic_lines,
)
from .corpus import (
    DEFAULT_FRACTIONS,
    TokenizeMode,
    load_parallel_jsonl,
    make_block_schedule,
    save_parallel_jsonl,
)
from .errors import (
    CausalMdlError,
    ComputationError,
    ConfigError,
    InputError,
)
from .evalstats import SummaryStats, welch_t_test
from .experiments import (
    GRID_CHANNEL,
    AdaptationKind,
    DaGridSpec,
    MetricKind,
    SslGridSpec,
    TaskDirection,
    aggregate_da,
    aggregate_ssl,
    da_rows_to_csv,
    read_da_csv,
    read_ssl_csv,
    run_da_grid,
    run_ssl_grid,
    ssl_rows_to_csv,
)
from .mdlcode import (
    CodedSide,
    CodeKind,
    conditional_mdl,
    direction_test,
    make_channel_factory,
    make_lm_factory,
    marginal_mdl,
    reports_to_csv,
    verdict_summary,
)
from .seqmodel import ChannelConfig, LmConfig

OUT_DIR_ENV = "CAUSALMDL_OUT"

_FAMILY_TOKENS = {
    "en-cipher": NoisedSide.CIPHERTEXT,
    "cipher-en": NoisedSide.SOURCE_TEXT,
}


# -- config plumbing -----------------------------------------------------------

def _resolve_config(args: argparse.Namespace) -> dict:
    """Flag values as a flat dict, with --config file entries overriding them."""
    cfg = {k: v for k, v in vars(args).items()
           if k not in ("func", "command", "config")}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise InputError(f"config file not found: {path}")
        try:
            overrides = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: malformed JSON config: {exc}") from None
        if not isinstance(overrides, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        unknown = sorted(set(overrides) - set(cfg))
        if unknown:
            raise ConfigError(f"{path}: unknown config keys: {', '.join(unknown)}")
        cfg.update(overrides)
    return cfg


def _fingerprint(command: str, cfg: dict) -> str:
    payload = {"command": command, **cfg}
    blob = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def _out_dir(cfg: dict) -> Path:
    out = cfg.get("out") or os.environ.get(OUT_DIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2,
                               ensure_ascii=False) + "\n", encoding="utf-8")


def _write_manifest(out: Path, command: str, cfg: dict, fingerprint: str,
                    seed: int, outputs: list[str], extra: dict | None = None) -> None:
    payload = {
        "command": command,
        "config": {k: _jsonable(v) for k, v in sorted(cfg.items())},
        "config_fingerprint": fingerprint,
        "global_seed": seed,
        "outputs": sorted(outputs),
        "version": __version__,
    }
    if extra:
        payload.update(extra)
    _write_json(out / "manifest.json", payload)


def _jsonable(v):
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    return str(v)


def _ints(value, what: str) -> tuple[int, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(int(v) for v in value)
    try:
        return tuple(int(tok) for tok in str(value).split(",") if tok != "")
    except ValueError:
        raise ConfigError(f"cannot parse {what} from {value!r}") from None


def _floats(value, what: str) -> tuple[float, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    try:
        return tuple(float(tok) for tok in str(value).split(",") if tok != "")
    except ValueError:
        raise ConfigError(f"cannot parse {what} from {value!r}") from None


def _families(value) -> tuple[NoisedSide, ...]:
    tokens = value if isinstance(value, (list, tuple)) else str(value).split(",")
    out = []
    for tok in tokens:
        tok = str(tok).strip()
        if tok not in _FAMILY_TOKENS:
            raise ConfigError(
                f"unknown family {tok!r}; expected {sorted(_FAMILY_TOKENS)}")
        out.append(_FAMILY_TOKENS[tok])
    return tuple(out)


def _directions(value) -> tuple[TaskDirection, ...]:
    tokens = value if isinstance(value, (list, tuple)) else str(value).split(",")
    try:
        return tuple(TaskDirection(str(t).strip()) for t in tokens)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _mode(value) -> TokenizeMode:
    try:
        return TokenizeMode(value)
    except ValueError:
        raise ConfigError(f"unknown tokenization mode {value!r}") from None


def _grid_lines(cfg: dict, needed: int) -> list[str]:
    if cfg.get("input"):
        return load_lines(cfg["input"])
    count = cfg.get("synthetic_lines") or needed
    if count < needed:
        raise ConfigError(f"--synthetic-lines {count} is below the {needed} "
                          "lines the grid needs")
    return synthetic_lines(int(count), int(cfg["global_seed"]))


def _model_configs(cfg: dict, mode: TokenizeMode) -> tuple[LmConfig, ChannelConfig]:
    order = cfg.get("lm_order")
    lm = LmConfig(order=int(order)) if order else LmConfig.for_mode(mode)
    channel = ChannelConfig(target_history=int(cfg["channel_history"]),
                            source_window=int(cfg["channel_window"]))
    return lm, channel


# -- subcommands -----------------------------------------------------------------

def cmd_generate(cfg: dict) -> None:
    fp = _fingerprint("generate", cfg)
    out = _out_dir(cfg)
    lines = load_lines(cfg["input"])
    mode = _mode(cfg["mode"])
    disabled = {NoiseKind(d) for d in (cfg.get("disable") or [])}
    noise = NoiseSpec(p=float(cfg["p"]), enabled=ALL_NOISE - disabled,
                      rng_seed=int(cfg["seed"]))
    spec = CipherDatasetSpec(lines=tuple(lines), noised_side=NoisedSide(cfg["noised_side"]),
                             noise=noise, mode=mode, name=cfg.get("name") or "")
    corpus = generate_cipher_dataset(spec)
    save_parallel_jsonl(corpus, out / "corpus.jsonl")
    _write_manifest(out, "generate", cfg, fp, int(cfg["seed"]), ["corpus.jsonl"], extra={
        "counts": {
            "pairs": len(corpus),
            "src_vocab": corpus.src_vocab.size,
            "tgt_vocab": corpus.tgt_vocab.size,
            "src_tokens": sum(len(p.src) for p in corpus.pairs),
            "tgt_tokens": sum(len(p.tgt) for p in corpus.pairs),
        },
        "dataset_name": corpus.name,
    })
    print(f"wrote {out / 'corpus.jsonl'} ({len(corpus)} pairs, fingerprint {fp})")


def cmd_discover(cfg: dict) -> None:
    fp = _fingerprint("discover", cfg)
    out = _out_dir(cfg)
    seed = int(cfg["global_seed"])
    mode = _mode(cfg["mode"])
    corpus = load_parallel_jsonl(cfg["corpus"], mode, mode)
    schedule = make_block_schedule(len(corpus), _floats(cfg["fractions"], "fractions"))
    lm_cfg, ch_cfg = _model_configs(cfg, mode)
    verdict = direction_test(corpus, schedule,
                             make_lm_factory(lm_cfg), make_channel_factory(ch_cfg))
    reports_to_csv(verdict.reports, out / "blocks.csv")
    payload = verdict_summary(verdict)
    payload.update({
        "config_fingerprint": fp,
        "global_seed": seed,
        "corpus": corpus.name,
        "n_pairs": len(corpus),
        "schedule": list(schedule.indices),
    })
    _write_json(out / "verdict.json", payload)
    _write_manifest(out, "discover", cfg, fp, seed, ["verdict.json", "blocks.csv"])
    print(f"verdict: {verdict.verdict.value}  margin: {verdict.margin_kbits:+.3f} kbits "
          f"(causal {verdict.l_causal_bits / 1000.0:.3f} vs "
          f"anticausal {verdict.l_anticausal_bits / 1000.0:.3f} kbits)")


def cmd_mdl(cfg: dict) -> None:
    fp = _fingerprint("mdl", cfg)
    out = _out_dir(cfg)
    seed = int(cfg["global_seed"])
    mode = _mode(cfg["mode"])
    corpus = load_parallel_jsonl(cfg["corpus"], mode, mode)
    schedule = make_block_schedule(len(corpus), _floats(cfg["fractions"], "fractions"))
    lm_cfg, ch_cfg = _model_configs(cfg, mode)
    try:
        kind = CodeKind(cfg["kind"])
    except ValueError:
        raise ConfigError(f"unknown report kind {cfg['kind']!r}") from None
    if kind is CodeKind.MARGINAL_X:
        report = marginal_mdl(corpus.src_seqs, corpus.src_vocab, schedule,
                              make_lm_factory(lm_cfg), kind)
    elif kind is CodeKind.MARGINAL_Y:
        report = marginal_mdl(corpus.tgt_seqs, corpus.tgt_vocab, schedule,
                              make_lm_factory(lm_cfg), kind)
    else:
        side = (CodedSide.TGT_GIVEN_SRC if kind is CodeKind.COND_Y_GIVEN_X
                else CodedSide.SRC_GIVEN_TGT)
        report = conditional_mdl(corpus.pairs, corpus.src_vocab, corpus.tgt_vocab,
                                 schedule, make_channel_factory(ch_cfg), side)
    reports_to_csv([report], out / "blocks.csv")
    _write_json(out / "report.json", {
        "kind": report.kind.value,
        "uniform_block_bits": report.uniform_block_bits,
        "per_block_bits": list(report.per_block_bits),
        "total_bits": report.total_bits,
        "total_kbits": report.total_kbits,
        "schedule": list(schedule.indices),
        "model_fingerprint": report.model_fingerprint,
        "config_fingerprint": fp,
        "global_seed": seed,
        "corpus": corpus.name,
    })
    _write_manifest(out, "mdl", cfg, fp, seed, ["report.json", "blocks.csv"])
    print(f"{report.kind.value}: {report.total_kbits:.3f} kbits over "
          f"{schedule.num_blocks} blocks")


def cmd_ssl(cfg: dict) -> None:
    fp = _fingerprint("ssl", cfg)
    out = _out_dir(cfg)
    seed = int(cfg["global_seed"])
    k, m, test_n = int(cfg["k"]), int(cfg["m"]), int(cfg["test_n"])
    spec = SslGridSpec(
        families=_families(cfg["families"]),
        directions=_directions(cfg["directions"]),
        seeds=_ints(cfg["seeds"], "seeds"),
        k=k, m=m, test_n=test_n,
        iterations=int(cfg["iterations"]),
        noise_p=float(cfg["p"]),
        mode=_mode(cfg["mode"]),
        metric=MetricKind(cfg["metric"]),
        channel=ChannelConfig(target_history=int(cfg["channel_history"]),
                              source_window=int(cfg["channel_window"])),
    )
    lines = _grid_lines(cfg, k + m + test_n)
    for family in spec.families:
        for cell_seed in spec.seeds:
            stream = derive_seed("ssl-cell", family.value, cell_seed)
            print(f"cell {family.value}|{cell_seed}: data stream seed {stream}")
    result = run_ssl_grid(lines, spec, jobs=int(cfg["jobs"]))
    ssl_rows_to_csv(result.rows, out / "ssl_results.csv")
    agg = aggregate_ssl(result.rows)
    agg.update({"config_fingerprint": fp, "global_seed": seed,
                "errors": [list(e) for e in result.errors]})
    _write_json(out / "ssl_aggregate.json", agg)
    _write_manifest(out, "ssl", cfg, fp, seed,
                    ["ssl_results.csv", "ssl_aggregate.json"])
    for cell, message in result.errors:
        print(f"cell {cell} failed: {message}", file=sys.stderr)
    if not result.rows:
        raise ComputationError("every grid cell failed")
    print(f"wrote {len(result.rows)} rows to {out / 'ssl_results.csv'}")


def cmd_da(cfg: dict) -> None:
    fp = _fingerprint("da", cfg)
    out = _out_dir(cfg)
    seed = int(cfg["global_seed"])
    spec = DaGridSpec(
        directions=_directions(cfg["directions"]),
        seeds=_ints(cfg["seeds"], "seeds"),
        family=_families(cfg["family"])[0],
        source_p=float(cfg["source_p"]),
        target_p=float(cfg["target_p"]),
        source_n=int(cfg["source_n"]),
        adapt_n=int(cfg["adapt_n"]),
        test_n=int(cfg["test_n"]),
        adaptation=AdaptationKind(cfg["adaptation"]),
        mode=_mode(cfg["mode"]),
        metric=MetricKind(cfg["metric"]),
        channel=ChannelConfig(target_history=int(cfg["channel_history"]),
                              source_window=int(cfg["channel_window"])),
    )
    lines = _grid_lines(cfg, spec.source_n + spec.adapt_n + spec.test_n)
    for cell_seed in spec.seeds:
        print(f"cell {spec.family.value}|{cell_seed}: "
              f"data stream seed {derive_seed('da-cell', cell_seed)}")
    result = run_da_grid(lines, spec, jobs=int(cfg["jobs"]))
    da_rows_to_csv(result.rows, out / "da_results.csv")
    agg = aggregate_da(result.rows)
    agg.update({"config_fingerprint": fp, "global_seed": seed,
                "errors": [list(e) for e in result.errors]})
    _write_json(out / "da_aggregate.json", agg)
    _write_manifest(out, "da", cfg, fp, seed,
                    ["da_results.csv", "da_aggregate.json"])
    for cell, message in result.errors:
        print(f"cell {cell} failed: {message}", file=sys.stderr)
    if not result.rows:
        raise ComputationError("every grid cell failed")
    print(f"wrote {len(result.rows)} rows to {out / 'da_results.csv'}")


def cmd_meta(cfg: dict) -> None:
    fp = _fingerprint("meta", cfg)
    out = _out_dir(cfg)
    seed = int(cfg["global_seed"])
    try:
        if cfg.get("csv"):
            a, b, labels = _stats_from_csv(cfg["csv"])
        else:
            needed = ("n_a", "mean_a", "std_a", "n_b", "mean_b", "std_b")
            missing = [k for k in needed if cfg.get(k) is None]
            if missing:
                raise ConfigError(
                    f"meta needs either --csv or all of: {', '.join('--' + k.replace('_', '-') for k in missing)}")
            a = SummaryStats(n=int(cfg["n_a"]), mean=float(cfg["mean_a"]),
                             std=float(cfg["std_a"]))
            b = SummaryStats(n=int(cfg["n_b"]), mean=float(cfg["mean_b"]),
                             std=float(cfg["std_b"]))
            labels = ("a", "b")
        result = welch_t_test(a, b)
    except InputError as exc:
        # Bad statistics are a computation-stage failure for this command.
        raise ComputationError(str(exc)) from exc
    payload = {
        "group_a": {"label": labels[0], "n": a.n, "mean": a.mean, "std": a.std},
        "group_b": {"label": labels[1], "n": b.n, "mean": b.mean, "std": b.std},
        "t_statistic": result.t_statistic,
        "df": result.df,
        "p_two_sided": result.p_two_sided,
        "config_fingerprint": fp,
        "global_seed": seed,
    }
    _write_json(out / "meta.json", payload)
    _write_manifest(out, "meta", cfg, fp, seed, ["meta.json"])
    print(f"t = {result.t_statistic:.4f}, df = {result.df:.2f}, "
          f"p = {result.p_two_sided:.4f}")


def _stats_from_csv(path_str: str) -> tuple[SummaryStats, SummaryStats, tuple[str, str]]:
    import csv as _csv

    path = Path(path_str)
    if not path.exists():
        raise InputError(f"deltas file not found: {path}")
    groups: dict[str, list[float]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = _csv.DictReader(fh)
        if reader.fieldnames is None or not {"group", "value"} <= set(reader.fieldnames):
            raise InputError(f"{path}: need CSV columns 'group' and 'value'")
        for i, rec in enumerate(reader, start=2):
            try:
                groups.setdefault(rec["group"], []).append(float(rec["value"]))
            except (TypeError, ValueError):
                raise InputError(f"{path}:{i}: bad value {rec.get('value')!r}") from None
    if len(groups) != 2:
        raise InputError(f"{path}: need exactly 2 groups, found {sorted(groups)}")
    (la, va), (lb, vb) = sorted(groups.items())
    return SummaryStats.from_values(va), SummaryStats.from_values(vb), (la, lb)


def cmd_report(cfg: dict) -> None:
    fp = _fingerprint("report", cfg)
    out = _out_dir(cfg)
    seed = int(cfg["global_seed"])
    if not cfg.get("ssl_csv") and not cfg.get("da_csv"):
        raise ConfigError("report needs --ssl-csv and/or --da-csv")
    outputs = []
    if cfg.get("ssl_csv"):
        rows = read_ssl_csv(cfg["ssl_csv"])
        agg = aggregate_ssl(rows)
        agg.update({"config_fingerprint": fp, "global_seed": seed,
                    "source": str(cfg["ssl_csv"])})
        _write_json(out / "ssl_aggregate.json", agg)
        outputs.append("ssl_aggregate.json")
        print(f"ssl: {len(rows)} rows, {len(agg['groups'])} groups")
    if cfg.get("da_csv"):
        rows = read_da_csv(cfg["da_csv"])
        agg = aggregate_da(rows)
        agg.update({"config_fingerprint": fp, "global_seed": seed,
                    "source": str(cfg["da_csv"])})
        _write_json(out / "da_aggregate.json", agg)
        outputs.append("da_aggregate.json")
        print(f"da: {len(rows)} rows, {len(agg['groups'])} groups")
    _write_manifest(out, "report", cfg, fp, seed, outputs)


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalmdl",
        description="Causal direction via prequential MDL, plus SSL/DA "
                    "asymmetry experiments on decipherment corpora.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None,
                       help="JSON file whose entries override flags")
        p.add_argument("--out", default=None,
                       help=f"output directory (default ${OUT_DIR_ENV} or .)")
        p.add_argument("--global-seed", dest="global_seed", type=int, default=0)

    def model_flags(p: argparse.ArgumentParser, history: int = 2) -> None:
        p.add_argument("--channel-history", dest="channel_history", type=int,
                       default=history)
        p.add_argument("--channel-window", dest="channel_window", type=int, default=1)

    p = sub.add_parser("generate", help="build a cipher corpus from a text file")
    p.add_argument("--input", required=True, help="UTF-8 text file, one line per pair")
    p.add_argument("--noised-side", dest="noised_side", default="ciphertext",
                   choices=[s.value for s in NoisedSide])
    p.add_argument("--p", type=float, default=0.05, help="per-noise probability")
    p.add_argument("--seed", type=int, default=0, help="noise rng seed")
    p.add_argument("--mode", default="char", choices=[m.value for m in TokenizeMode])
    p.add_argument("--name", default="", help="dataset name override")
    p.add_argument("--disable", action="append", default=[],
                   choices=[k.value for k in NoiseKind],
                   help="disable one noise operator (repeatable)")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("discover", help="two-way MDL direction test on a corpus")
    p.add_argument("--corpus", required=True, help="JSONL corpus path")
    p.add_argument("--mode", default="char", choices=[m.value for m in TokenizeMode])
    p.add_argument("--lm-order", dest="lm_order", type=int, default=None,
                   help="n-gram order (default: 5 for char, 3 for word)")
    p.add_argument("--fractions", default=",".join(str(f) for f in DEFAULT_FRACTIONS))
    model_flags(p)
    common(p)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("mdl", help="one online-code component report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--kind", required=True, choices=[k.value for k in CodeKind])
    p.add_argument("--mode", default="char", choices=[m.value for m in TokenizeMode])
    p.add_argument("--lm-order", dest="lm_order", type=int, default=None)
    p.add_argument("--fractions", default=",".join(str(f) for f in DEFAULT_FRACTIONS))
    model_flags(p)
    common(p)
    p.set_defaults(func=cmd_mdl)

    p = sub.add_parser("ssl", help="self-training grid over task directions")
    p.add_argument("--input", default=None, help="text file of lines")
    p.add_argument("--synthetic-lines", dest="synthetic_lines", type=int, default=None,
                   help="generate this many synthetic lines instead of --input")
    p.add_argument("--families", default="en-cipher,cipher-en")
    p.add_argument("--directions", default="causal,anticausal")
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--k", type=int, default=500, help="labeled pairs per cell")
    p.add_argument("--m", type=int, default=20000, help="unlabeled inputs per cell")
    p.add_argument("--test-n", dest="test_n", type=int, default=1000)
    p.add_argument("--iterations", type=int, default=3)
    p.add_argument("--p", type=float, default=0.05)
    p.add_argument("--mode", default="char", choices=[m.value for m in TokenizeMode])
    p.add_argument("--metric", default="bleu", choices=[m.value for m in MetricKind])
    p.add_argument("--jobs", type=int, default=1)
    model_flags(p, history=GRID_CHANNEL.target_history)
    common(p)
    p.set_defaults(func=cmd_ssl)

    p = sub.add_parser("da", help="domain-adaptation grid over task directions")
    p.add_argument("--input", default=None)
    p.add_argument("--synthetic-lines", dest="synthetic_lines", type=int, default=None)
    p.add_argument("--family", default="en-cipher")
    p.add_argument("--directions", default="causal,anticausal")
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--source-p", dest="source_p", type=float, default=0.05)
    p.add_argument("--target-p", dest="target_p", type=float, default=0.15)
    p.add_argument("--source-n", dest="source_n", type=int, default=4000)
    p.add_argument("--adapt-n", dest="adapt_n", type=int, default=500)
    p.add_argument("--test-n", dest="test_n", type=int, default=500)
    p.add_argument("--adaptation", default="count_merge",
                   choices=[a.value for a in AdaptationKind])
    p.add_argument("--mode", default="char", choices=[m.value for m in TokenizeMode])
    p.add_argument("--metric", default="bleu", choices=[m.value for m in MetricKind])
    p.add_argument("--jobs", type=int, default=1)
    model_flags(p, history=GRID_CHANNEL.target_history)
    common(p)
    p.set_defaults(func=cmd_da)

    p = sub.add_parser("meta", help="Welch's t-test on summary stats or raw deltas")
    p.add_argument("--n-a", dest="n_a", type=int, default=None)
    p.add_argument("--mean-a", dest="mean_a", type=float, default=None)
    p.add_argument("--std-a", dest="std_a", type=float, default=None)
    p.add_argument("--n-b", dest="n_b", type=int, default=None)
    p.add_argument("--mean-b", dest="mean_b", type=float, default=None)
    p.add_argument("--std-b", dest="std_b", type=float, default=None)
    p.add_argument("--csv", default=None,
                   help="CSV with columns group,value (exactly two groups)")
    common(p)
    p.set_defaults(func=cmd_meta)

    p = sub.add_parser("report", help="re-aggregate existing result CSVs")
    p.add_argument("--ssl-csv", dest="ssl_csv", default=None)
    p.add_argument("--da-csv", dest="da_csv", default=None)
    common(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        args.func(cfg)
        return 0
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ComputationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except CausalMdlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
