"""Command-line entry point.

Subcommands: validate, convert, score, mix, stats, lora-demo. The CLI is
a thin adapter over the library — it parses flags, resolves the effective
configuration (flags > --config file > DRSKIT_SEED/DRSKIT_JOBS > defaults),
echoes that configuration to stderr as a banner, and renders library
results. Exit codes: 0 success, 1 data error (or findings under
--strict), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .convert import (
    NotWellFormedError,
    clauses_to_graph,
    default_item_order,
    graph_to_sbn,
    sbn_to_graph,
)
from .corpusio import (
    CLAUSE_FORMAT,
    SBN_FORMAT,
    CorpusDataError,
    load_aligned,
    load_documents,
    score_texts,
    validate_texts,
)
from .datamix import (
    DEFAULT_BATCH_SIZE,
    REGIME_CROSS_LINGUAL,
    REGIMES,
    ManifestError,
    load_manifest,
    regime_schedule,
    schedule_batches,
)
from .formats import (
    ClauseParseError,
    SbnParseError,
    linearize_clauses,
    linearize_sbn,
    parse_clause_file,
    parse_sbn_file,
    serialize_clause_file,
    serialize_sbn_file,
)
from .lora import grad_check, param_counts
from .metrics import KERNEL_NAME, GoldNotWellFormedError, SearchConfig
from .metrics.matching import DEFAULT_EXACT_THRESHOLD, DEFAULT_RESTARTS
from .reports import (
    batch_record,
    machine_score_report,
    machine_stats_report,
    machine_validation_report,
    render_lora_report,
    render_schedule,
    render_score_report,
    render_stats_table,
    render_validation_report,
)

HUMAN, MACHINE = "human", "machine"


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="drskit",
        description="Clause/graph/sequence meaning representations: "
                    "validate, convert, score, mix, and adapter numerics.",
    )
    p.add_argument("--version", action="version", version=f"drskit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add_report(sp):
        sp.add_argument("--report", choices=(HUMAN, MACHINE), default=HUMAN,
                        help="output style (default: human)")

    def add_common(sp):
        sp.add_argument("--config", metavar="FILE",
                        help="JSON file with default option values")
        sp.add_argument("--output", metavar="FILE",
                        help="write the report here instead of stdout")

    v = sub.add_parser("validate", help="check well-formedness of model output")
    v.add_argument("input", help="document file (blank-line separated) or directory")
    v.add_argument("--mode", choices=(CLAUSE_FORMAT, SBN_FORMAT),
                   default=CLAUSE_FORMAT, help="input grammar (default: clause)")
    v.add_argument("--strict", action="store_true",
                   help="exit nonzero when any document is ill-formed")
    add_report(v)
    add_common(v)

    c = sub.add_parser("convert", help="convert between representation forms")
    c.add_argument("input", help="document file or directory")
    c.add_argument("--from", dest="from_format",
                   choices=(CLAUSE_FORMAT, SBN_FORMAT), default=CLAUSE_FORMAT,
                   help="input grammar (default: clause)")
    c.add_argument("--to", dest="to_format", required=True,
                   choices=(CLAUSE_FORMAT, SBN_FORMAT, "graph-json", "tokens"),
                   help="output form")
    add_common(c)

    s = sub.add_parser("score", help="score predictions against references")
    s.add_argument("pred", help="prediction file or directory")
    s.add_argument("gold", help="reference file or directory")
    s.add_argument("--mode", choices=("clause", "graph"), default="clause",
                   help="clause-level or graph-triple matching (default: clause)")
    s.add_argument("--format", dest="fmt", choices=(CLAUSE_FORMAT, SBN_FORMAT),
                   default=CLAUSE_FORMAT,
                   help="input grammar; graph mode accepts both (default: clause)")
    s.add_argument("--pred-encoding", choices=("native", "tokens"),
                   default="native",
                   help="predictions as grammar text or as one line of "
                        "separator-joined tokens per document")
    s.add_argument("--seed", type=int, default=None,
                   help="search seed (default: 0, or DRSKIT_SEED)")
    s.add_argument("--restarts", type=int, default=None,
                   help=f"hill-climbing restarts (default: {DEFAULT_RESTARTS})")
    s.add_argument("--exact-threshold", type=int, default=None,
                   help="exhaustive search up to this many variables "
                        f"(default: {DEFAULT_EXACT_THRESHOLD})")
    s.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default: 1, or DRSKIT_JOBS)")
    s.add_argument("--sources", metavar="FILE",
                   help="aligned raw source texts; adds the per-length table")
    s.add_argument("--macro", action="store_true",
                   help="also report the per-document macro F1")
    s.add_argument("--strict", action="store_true",
                   help="exit nonzero when any prediction is ill-formed")
    add_report(s)
    add_common(s)

    m = sub.add_parser("mix", help="emit deterministic training batches")
    m.add_argument("manifest", help="corpus manifest root directory")
    m.add_argument("--regime", choices=REGIMES, default=REGIME_CROSS_LINGUAL,
                   help="training regime (default: cross-lingual)")
    m.add_argument("--language", default=None,
                   help="target language (required by all regimes except "
                        "cross-lingual)")
    m.add_argument("--format", dest="fmt", choices=(CLAUSE_FORMAT, SBN_FORMAT),
                   default=CLAUSE_FORMAT, help="target-file grammar")
    m.add_argument("--batch-size", type=int, default=None,
                   help=f"instances per batch (default: {DEFAULT_BATCH_SIZE})")
    m.add_argument("--seed", type=int, default=None,
                   help="shuffle seed (default: 0, or DRSKIT_SEED)")
    m.add_argument("--epochs", type=int, default=None,
                   help="override every stage's epoch count (e.g. for smoke runs)")
    m.add_argument("--schedule-only", action="store_true",
                   help="print the stage schedule instead of batches")
    add_common(m)

    t = sub.add_parser("stats", help="corpus statistics table")
    t.add_argument("manifest", help="corpus manifest root directory")
    t.add_argument("--format", dest="fmt", choices=(CLAUSE_FORMAT, SBN_FORMAT),
                   default=CLAUSE_FORMAT, help="target-file grammar")
    add_report(t)
    add_common(t)

    l = sub.add_parser("lora-demo", help="adapter parameter counts and gradient check")
    l.add_argument("--d", type=int, default=1024, help="output dimension")
    l.add_argument("--k", type=int, default=1024, help="input dimension")
    l.add_argument("--r", type=int, default=32, help="adapter rank")
    l.add_argument("--seed", type=int, default=None,
                   help="layer-sampling seed (default: 0, or DRSKIT_SEED)")
    l.add_argument("--trials", type=int, default=25,
                   help="random small layers to gradient-check (default: 25)")
    l.add_argument("--tolerance", type=float, default=1e-6,
                   help="max relative error allowed (default: 1e-6)")
    add_common(l)
    return p


# ---------------------------------------------------------------------------
# config resolution

def _load_config_file(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config file {path!r} must hold a JSON object")
    return data


def _env_int(name: str):
    raw = os.environ.get(name)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"{name} must be an integer, got {raw!r}") from exc


def _resolve(flag_value, config: dict, key: str, env_name, default):
    """flags > config file > environment > default."""
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    if env_name is not None:
        env_value = _env_int(env_name)
        if env_value is not None:
            return env_value
    return default


def _banner(command: str, settings: dict) -> None:
    parts = " ".join(f"{k}={v}" for k, v in settings.items())
    print(f"# drskit {command} {parts}", file=sys.stderr)


def _emit(text: str, output) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _emit_json(obj, output) -> None:
    _emit(json.dumps(obj, indent=2, sort_keys=True) + "\n", output)


# ---------------------------------------------------------------------------
# subcommands

def _cmd_validate(args) -> int:
    ids, texts = load_documents(args.input)
    _banner("validate", {"mode": args.mode, "documents": len(ids),
                         "strict": args.strict})
    pairs = validate_texts(ids, texts, args.mode)
    if args.report == MACHINE:
        _emit_json(machine_validation_report(pairs), args.output)
    else:
        _emit(render_validation_report(pairs), args.output)
    if args.strict and any(not r.well_formed for _, r in pairs):
        return 1
    return 0


def _graph_json(graph) -> dict:
    return {
        "nodes": [{"id": n.id, "kind": n.kind, "label": n.label}
                  for n in graph.nodes],
        "edges": [{"kind": e.kind, "src": e.src, "dst": e.dst, "label": e.label}
                  for e in graph.edges],
    }


def _cmd_convert(args) -> int:
    if args.from_format == SBN_FORMAT and args.to_format == CLAUSE_FORMAT:
        raise UsageError("cannot reconstruct clause variables from the "
                         "sequential form")
    ids, texts = load_documents(args.input)
    _banner("convert", {"from": args.from_format, "to": args.to_format,
                        "documents": len(ids)})
    graphs_json = []
    chunks = []
    for doc_id, text in zip(ids, texts):
        try:
            if args.from_format == CLAUSE_FORMAT:
                doc = parse_clause_file(text, strict=True)
            else:
                doc = parse_sbn_file(text)
            if args.to_format == "tokens":
                seq = (linearize_clauses(doc) if args.from_format == CLAUSE_FORMAT
                       else linearize_sbn(doc))
                chunks.append(seq.joined())
            elif args.to_format == args.from_format:
                chunks.append(serialize_clause_file(doc)
                              if args.from_format == CLAUSE_FORMAT
                              else serialize_sbn_file(doc))
            else:
                graph = (clauses_to_graph(doc)
                         if args.from_format == CLAUSE_FORMAT
                         else sbn_to_graph(doc))
                if args.to_format == "graph-json":
                    graphs_json.append(_graph_json(graph))
                else:  # sbn
                    sbn = graph_to_sbn(graph, default_item_order(graph))
                    chunks.append(serialize_sbn_file(sbn))
        except (ClauseParseError, SbnParseError, NotWellFormedError) as exc:
            raise CorpusDataError(f"document {doc_id!r}: {exc}") from exc
    if args.to_format == "graph-json":
        _emit_json(graphs_json, args.output)
    elif args.to_format == "tokens":
        _emit("\n".join(chunks) + "\n", args.output)
    else:
        _emit("\n\n".join(c.rstrip("\n") for c in chunks) + "\n", args.output)
    return 0


def _cmd_score(args) -> int:
    config_file = _load_config_file(args.config)
    seed = _resolve(args.seed, config_file, "seed", "DRSKIT_SEED", 0)
    restarts = _resolve(args.restarts, config_file, "restarts", None,
                        DEFAULT_RESTARTS)
    threshold = _resolve(args.exact_threshold, config_file, "exact_threshold",
                         None, DEFAULT_EXACT_THRESHOLD)
    jobs = _resolve(args.jobs, config_file, "jobs", "DRSKIT_JOBS", 1)
    if args.mode == "clause" and args.fmt != CLAUSE_FORMAT:
        raise UsageError("clause mode scores clause-format input; "
                         "use --mode graph for the sequential form")

    ids, pred_texts, gold_texts = load_aligned(args.pred, args.gold)
    sources = None
    if args.sources:
        _, sources = load_documents(args.sources)

    settings = {"mode": args.mode, "format": args.fmt,
                "pred-encoding": args.pred_encoding, "seed": seed,
                "restarts": restarts, "exact-threshold": threshold,
                "jobs": jobs, "documents": len(ids), "kernel": KERNEL_NAME}
    _banner("score", settings)

    report = score_texts(
        ids, pred_texts, gold_texts,
        mode=args.mode, fmt=args.fmt, encoding=args.pred_encoding,
        config=SearchConfig(seed=seed, restarts=restarts,
                            exact_threshold=threshold),
        jobs=jobs, sources=sources, macro=args.macro)

    if args.report == MACHINE:
        _emit_json(machine_score_report(report, {
            "mode": args.mode, "format": args.fmt,
            "pred_encoding": args.pred_encoding, "seed": seed,
            "restarts": restarts, "exact_threshold": threshold,
        }), args.output)
    else:
        _emit(render_score_report(report), args.output)
    if args.strict and report.n_ill_formed:
        return 1
    return 0


def _cmd_mix(args) -> int:
    config_file = _load_config_file(args.config)
    seed = _resolve(args.seed, config_file, "seed", "DRSKIT_SEED", 0)
    batch_size = _resolve(args.batch_size, config_file, "batch_size", None,
                          DEFAULT_BATCH_SIZE)
    if args.regime != REGIME_CROSS_LINGUAL and args.language is None:
        raise UsageError(f"regime {args.regime!r} needs --language")

    manifest = load_manifest(args.manifest, args.fmt)
    schedule = regime_schedule(args.regime, manifest, args.language, batch_size)
    _banner("mix", {"regime": args.regime, "language": args.language or "-",
                    "batch-size": batch_size, "seed": seed,
                    "epochs": args.epochs if args.epochs is not None else "schedule",
                    "stages": len(schedule.stages)})
    if args.schedule_only:
        _emit(render_schedule(schedule), args.output)
        return 0

    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    try:
        for stage_name, batch in schedule_batches(manifest, schedule, seed,
                                                  epochs_override=args.epochs):
            out.write(json.dumps(batch_record(stage_name, batch),
                                 sort_keys=True) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_stats(args) -> int:
    manifest = load_manifest(args.manifest, args.fmt)
    _banner("stats", {"languages": ",".join(manifest.languages) or "-"})
    if args.report == MACHINE:
        _emit_json(machine_stats_report(manifest), args.output)
    else:
        _emit(render_stats_table(manifest) + "\n", args.output)
    return 0


def _cmd_lora_demo(args) -> int:
    import numpy as np

    config_file = _load_config_file(args.config)
    seed = _resolve(args.seed, config_file, "seed", "DRSKIT_SEED", 0)
    try:
        counts = param_counts(args.d, args.k, args.r)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _banner("lora-demo", {"d": args.d, "k": args.k, "r": args.r,
                          "seed": seed, "trials": args.trials})
    from .testing import random_lora_layer

    rng = np.random.default_rng(seed)
    errors = []
    for _ in range(args.trials):
        layer = random_lora_layer(rng)
        x = rng.standard_normal(layer.k)
        g = rng.standard_normal(layer.d)
        errors.append(grad_check(layer, x, g).max_relative_error)
    _emit(render_lora_report(args.d, args.k, args.r, counts, errors,
                             args.tolerance), args.output)
    return 0 if (not errors or max(errors) < args.tolerance) else 1


DISPATCH = {
    "validate": _cmd_validate,
    "convert": _cmd_convert,
    "score": _cmd_score,
    "mix": _cmd_mix,
    "stats": _cmd_stats,
    "lora-demo": _cmd_lora_demo,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return DISPATCH[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (CorpusDataError, ManifestError, NotWellFormedError,
            GoldNotWellFormedError, ClauseParseError, SbnParseError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
