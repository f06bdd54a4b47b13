"""Rendering: corpus statistics, score tables, validation summaries.

Human tables follow the conventional presentation: counts with thousands
separators and "/" for splits a language simply does not have; F1 scaled
by 100 with two decimals under an "F1↑" column and the ill-formedness
rate under "IF↓" (the arrow marks the better direction); the
fine-grained block lists the relation categories and the synset
part-of-speech rows. Machine reports are plain dicts with a versioned
schema, serialized by the caller.
"""
from __future__ import annotations

from typing import Sequence

from .datamix import SPLITS, Batch, CorpusManifest, StageSchedule
from .metrics.scoring import CorpusReport
from .validation import ValidationReport

SCHEMA_VERSION = "1"

F1_HEADER = "F1↑"
IF_HEADER = "IF↓"

CATEGORY_LABELS = {
    "all": "All",
    "drs-operator": "DRS operator",
    "semantic-role": "Semantic Role",
    "concept": "Concept",
    "synset-n": "Synset-Noun",
    "synset-v": "Synset-Verb",
    "synset-a": "Synset-Adjective",
    "synset-r": "Synset-Adverb",
}

MODE_LABELS = {"clause": "Counter", "graph": "Smatch"}


def _count(n: int) -> str:
    return f"{n:,}"


def _score(x: float) -> str:
    """F1-like value scaled to 0..100, two decimals."""
    return f"{100.0 * x:.2f}"


def _table(rows: Sequence[Sequence[str]], right_from: int = 1) -> str:
    """Fixed-width table: first column(s) left-aligned, the rest right."""
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    lines = []
    for r in rows:
        cells = []
        for c, cell in enumerate(r):
            if c < right_from:
                cells.append(cell.ljust(widths[c]))
            else:
                cells.append(cell.rjust(widths[c]))
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# corpus statistics

def render_stats_table(manifest: CorpusManifest) -> str:
    """Splits as rows, languages as columns, totals on both axes;
    "/" where a language lacks the split entirely."""
    langs = manifest.languages
    head = ["Split", *langs, "Total"]
    rows = [head]
    col_totals = {lang: 0 for lang in langs}
    grand = 0
    for split in SPLITS:
        row = [split]
        row_total = 0
        for lang in langs:
            if (lang, split) in manifest.records:
                n = len(manifest.records[(lang, split)])
                row.append(_count(n))
                row_total += n
                col_totals[lang] += n
            else:
                row.append("/")
        row.append(_count(row_total))
        grand += row_total
        rows.append(row)
    rows.append(["Total", *(_count(col_totals[lang]) for lang in langs),
                 _count(grand)])
    return _table(rows)


def machine_stats_report(manifest: CorpusManifest) -> dict:
    counts = {}
    for lang in manifest.languages:
        counts[lang] = {
            split: len(manifest.records[(lang, split)])
            for split in SPLITS if (lang, split) in manifest.records
        }
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "stats",
        "languages": list(manifest.languages),
        "counts": counts,
    }


# ---------------------------------------------------------------------------
# score reports

def render_score_report(report: CorpusReport) -> str:
    blocks = []
    label = MODE_LABELS.get(report.mode, report.mode)
    blocks.append(_table([
        ["Documents", _count(report.n_documents)],
        ["Ill-formed", _count(report.n_ill_formed)],
    ]))
    core = [
        ["", F1_HEADER, IF_HEADER],
        [label, _score(report.overall.f1), f"{report.if_percent:.2f}"],
    ]
    blocks.append(_table(core))
    if report.macro_f1 is not None:
        blocks.append(_table([["Macro F1^", _score(report.macro_f1)]]))

    if report.fine_grained is not None:
        rows = [["Category", F1_HEADER]]
        for key, res in report.fine_grained.rows():
            rows.append([CATEGORY_LABELS.get(key, key), _score(res.f1)])
        blocks.append("Fine-grained\n" + _table(rows))

    if report.length_table is not None:
        rows = [["Length", "Docs", F1_HEADER]]
        for row in report.length_table:
            rows.append([str(row.length), _count(row.count), _score(row.mean_f1)])
        blocks.append("By input length (tokens)\n" + _table(rows))
    return "\n\n".join(blocks) + "\n"


def machine_score_report(report: CorpusReport, config: dict) -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "kind": "score",
        "mode": report.mode,
        "config": dict(config),
        "documents": report.n_documents,
        "ill_formed": report.n_ill_formed,
        "if_percent": report.if_percent,
        "overall": report.overall.to_dict(),
        "per_document": [d.to_dict() for d in report.per_document],
    }
    if report.macro_f1 is not None:
        out["macro_f1"] = report.macro_f1
    if report.fine_grained is not None:
        out["fine_grained"] = report.fine_grained.to_dict()
    if report.length_table is not None:
        out["lengths"] = [
            {"length": r.length, "count": r.count, "mean_f1": r.mean_f1}
            for r in report.length_table
        ]
    return out


# ---------------------------------------------------------------------------
# validation reports

def render_validation_report(pairs: Sequence[tuple[str, ValidationReport]]) -> str:
    n = len(pairs)
    bad = sum(1 for _, r in pairs if not r.well_formed)
    if_percent = round(100.0 * bad / n, 2) if n else 0.0
    blocks = [_table([
        ["Documents", _count(n)],
        ["Ill-formed", _count(bad)],
        [IF_HEADER, f"{if_percent:.2f}"],
    ])]
    by_class: dict[str, int] = {}
    for _, rep in pairs:
        for e in rep.errors:
            by_class[e.error_class] = by_class.get(e.error_class, 0) + 1
    if by_class:
        rows = [["Class", "Count"]]
        for cls in sorted(by_class):
            rows.append([cls, _count(by_class[cls])])
        blocks.append("By class\n" + _table(rows))
        lines = []
        for doc_id, rep in pairs:
            for e in rep.errors:
                lines.append(f"{doc_id}  {e.error_class}  {e.location}: {e.detail}")
        blocks.append("Findings\n" + "\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def machine_validation_report(pairs: Sequence[tuple[str, ValidationReport]]) -> dict:
    n = len(pairs)
    bad = sum(1 for _, r in pairs if not r.well_formed)
    by_class: dict[str, int] = {}
    findings = []
    for doc_id, rep in pairs:
        for e in rep.errors:
            by_class[e.error_class] = by_class.get(e.error_class, 0) + 1
            findings.append({"id": doc_id, **e.to_dict()})
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "validate",
        "documents": n,
        "ill_formed": bad,
        "if_percent": round(100.0 * bad / n, 2) if n else 0.0,
        "by_class": by_class,
        "findings": findings,
    }


# ---------------------------------------------------------------------------
# mixing and adapter demo

def batch_record(stage_name: str, batch: Batch) -> dict:
    """Streamable record for one batch. Deliberately no language field."""
    return {
        "stage": stage_name,
        "epoch": batch.epoch,
        "batch": batch.index,
        "instances": [
            {"input": list(inst.input), "output": list(inst.output)}
            for inst in batch.instances
        ],
    }


def render_schedule(schedule: StageSchedule) -> str:
    rows = [["Stage", "Languages", "Splits", "Epochs", "Batch"]]
    for st in schedule.stages:
        langs = "all" if st.selector.languages is None else ",".join(st.selector.languages)
        rows.append([st.name, langs, "+".join(st.selector.splits),
                     str(st.epochs), str(st.batch_size)])
    return _table(rows, right_from=3) + "\n"


def render_lora_report(d: int, k: int, r: int, counts: dict,
                       trials: Sequence[float], tolerance: float) -> str:
    worst = max(trials) if trials else 0.0
    rows = [
        ["d x k", f"{d} x {k}"],
        ["rank", str(r)],
        ["full parameters", _count(counts["full"])],
        ["adapter parameters", _count(counts["lora"])],
        ["ratio", f"{counts['ratio']:.6f}"],
        ["gradient checks", _count(len(trials))],
        ["max relative error", f"{worst:.3e}"],
        ["tolerance", f"{tolerance:.0e}"],
        ["status", "ok" if worst < tolerance else "FAIL"],
    ]
    return _table(rows) + "\n"
