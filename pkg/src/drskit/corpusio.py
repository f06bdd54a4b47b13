"""Reading aligned corpora of documents for scoring and validation.

Inputs are either one file with blank-line-separated documents (ids are
the 0-based positions) or a directory of one-document files (sorted by
name, ids are the file stems). Gold-side ingestion is strict: anything
that fails to parse aborts with CorpusDataError. Prediction-side
ingestion is lenient: a document that cannot be decoded becomes an
ill-formedness value that the scorer counts instead of crashing on —
model output is data, not a bug.

The parallel driver re-parses each document inside its worker, so only
plain text and integers ever cross process boundaries; per-document
seeds are derived from the document index, making reports byte-identical
for any --jobs value.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence, Union

from .convert import NotWellFormedError, clauses_to_graph, sbn_to_graph
from .core import (
    ILLEGAL_CLAUSE_STRUCTURE,
    ClauseSet,
    IllFormedError,
    SequentialGraph,
    SymbolSequence,
)
from .formats import (
    ClauseParseError,
    SbnParseError,
    delinearize_clauses,
    delinearize_sbn,
    parse_clause_file,
    parse_sbn_file,
)
from .metrics.matching import MatchResult, SearchConfig, counter_f1, smatch_f1
from .metrics.scoring import (
    CLAUSE_MODE,
    GRAPH_MODE,
    CorpusReport,
    DocScore,
    FineGrainedReport,
    _clause_categories,
)
from .rand import derive_seed
from .registry import ArityRegistry, default_registry
from .validation import ValidationReport, validate_clauses

CLAUSE_FORMAT = "clause"
SBN_FORMAT = "sbn"
TOKEN_ENCODING = "tokens"
NATIVE_ENCODING = "native"


class CorpusDataError(Exception):
    """Unusable input data: gold that does not parse, misaligned corpora,
    unreadable paths."""


def split_documents(text: str) -> list[str]:
    """Split a multi-document file on blank lines."""
    docs = []
    current: list[str] = []
    for line in text.splitlines():
        if line.strip():
            current.append(line)
        elif current:
            docs.append("\n".join(current))
            current = []
    if current:
        docs.append("\n".join(current))
    return docs


def load_documents(path) -> tuple[list[str], list[str]]:
    """Return (ids, texts) for a corpus path (file or directory)."""
    p = Path(path)
    if p.is_dir():
        files = sorted(f for f in p.iterdir() if f.is_file())
        if not files:
            raise CorpusDataError(f"directory {str(p)!r} holds no files")
        return [f.stem for f in files], [f.read_text(encoding="utf-8") for f in files]
    if p.is_file():
        docs = split_documents(p.read_text(encoding="utf-8"))
        if not docs:
            raise CorpusDataError(f"{str(p)!r} holds no documents")
        return [str(i) for i in range(len(docs))], docs
    raise CorpusDataError(f"no such file or directory: {str(p)!r}")


def load_aligned(pred_path, gold_path) -> tuple[list[str], list[str], list[str]]:
    """Load two corpora and align them: by id when both sides are
    directories, positionally otherwise. Returns (ids, pred, gold)."""
    pred_is_dir = Path(pred_path).is_dir()
    gold_is_dir = Path(gold_path).is_dir()
    pids, ptexts = load_documents(pred_path)
    gids, gtexts = load_documents(gold_path)
    if pred_is_dir and gold_is_dir:
        if pids != gids:
            only_pred = sorted(set(pids) - set(gids))[:3]
            only_gold = sorted(set(gids) - set(pids))[:3]
            raise CorpusDataError(
                f"document ids differ (pred-only e.g. {only_pred}, "
                f"gold-only e.g. {only_gold})")
        return gids, ptexts, gtexts
    if len(ptexts) != len(gtexts):
        raise CorpusDataError(
            f"pred has {len(ptexts)} documents, gold has {len(gtexts)}")
    return gids, ptexts, gtexts


# ---------------------------------------------------------------------------
# per-document decoding

def _decode_tokens(text: str, fmt: str, registry) -> Union[ClauseSet, SequentialGraph]:
    seq = SymbolSequence(tuple(text.split()))
    if fmt == CLAUSE_FORMAT:
        return delinearize_clauses(seq, registry)
    return delinearize_sbn(seq)


def decode_pred(text: str, fmt: str, encoding: str = NATIVE_ENCODING,
                registry: Optional[ArityRegistry] = None,
                ) -> Union[ClauseSet, SequentialGraph, IllFormedError]:
    """Lenient model-output decoding: structural failures come back as
    IllFormedError values carrying the error class and location."""
    if fmt not in (CLAUSE_FORMAT, SBN_FORMAT):
        raise ValueError(f"unknown format {fmt!r}")
    if encoding not in (NATIVE_ENCODING, TOKEN_ENCODING):
        raise ValueError(f"unknown encoding {encoding!r}")
    try:
        if encoding == TOKEN_ENCODING:
            return _decode_tokens(text, fmt, registry)
        if fmt == CLAUSE_FORMAT:
            return parse_clause_file(text, registry, strict=False)
        return parse_sbn_file(text)
    except IllFormedError as exc:
        return exc
    except (ClauseParseError, SbnParseError) as exc:
        return IllFormedError(
            ILLEGAL_CLAUSE_STRUCTURE,
            location=exc.line_no,
            detail=str(exc),
        )


def decode_gold(text: str, fmt: str, doc_id: str,
                registry: Optional[ArityRegistry] = None,
                ) -> Union[ClauseSet, SequentialGraph]:
    """Strict reference decoding; failure is a data error, not a finding."""
    try:
        if fmt == CLAUSE_FORMAT:
            return parse_clause_file(text, registry, strict=True)
        return parse_sbn_file(text)
    except (ClauseParseError, SbnParseError) as exc:
        raise CorpusDataError(f"gold document {doc_id!r}: {exc}") from exc


def _to_graph(doc, doc_id: str, strict: bool, registry):
    """Convert a decoded document to graph form. Strict (gold) failures
    raise; lenient (pred) failures become ill-formedness values."""
    if isinstance(doc, IllFormedError):
        return doc
    try:
        if isinstance(doc, ClauseSet):
            return clauses_to_graph(doc, registry)
        return sbn_to_graph(doc)
    except NotWellFormedError as exc:
        if strict:
            raise CorpusDataError(
                f"gold document {doc_id!r} is not well-formed: {exc}") from exc
        first = exc.report.errors[0]
        return IllFormedError(first.error_class, first.location, first.detail)


# ---------------------------------------------------------------------------
# corpus scoring over text (serial or process-parallel)

def _doc_outcome(index: int, pred_text: str, gold_text: str, doc_id: str,
                 mode: str, fmt: str, encoding: str,
                 seed: int, restarts: int, exact_threshold: int) -> dict:
    """Score one document from raw text; returns only plain data so the
    result can cross a process boundary."""
    registry = default_registry()
    config = SearchConfig(seed=derive_seed(seed, index), restarts=restarts,
                          exact_threshold=exact_threshold)
    gold = decode_gold(gold_text, fmt, doc_id, registry)
    pred = decode_pred(pred_text, fmt, encoding, registry)

    out = {
        "index": index, "id": doc_id,
        "error_classes": [], "well_formed": True,
        "cat_matched": {}, "cat_pred": {}, "cat_gold": {},
    }

    if mode == GRAPH_MODE:
        gold_graph = _to_graph(gold, doc_id, True, registry)
        pred_graph = _to_graph(pred, doc_id, False, registry)
        if isinstance(pred_graph, IllFormedError):
            out["well_formed"] = False
            out["error_classes"] = [pred_graph.error_class]
        result = smatch_f1(pred_graph, gold_graph, config)
        out.update(matched=result.matched, pred_total=result.pred_total,
                   gold_total=result.gold_total, f1=result.f1)
        return out

    # clause mode
    if fmt != CLAUSE_FORMAT:
        raise ValueError("clause mode needs clause-format input")
    gold_report = validate_clauses(gold, registry)
    if not gold_report.well_formed:
        raise CorpusDataError(
            f"gold document {doc_id!r} is not well-formed: "
            f"{gold_report.errors[0].detail}")
    if isinstance(pred, IllFormedError):
        report = ValidationReport.from_ill_formed(pred)
    else:
        report = validate_clauses(pred, registry)
    out["well_formed"] = report.well_formed
    out["error_classes"] = [e.error_class for e in report.errors]

    if isinstance(pred, IllFormedError):
        result = MatchResult.from_counts(0, 0, len(gold))
        mapping = None
    elif not report.well_formed:
        result = MatchResult.from_counts(0, len(pred), len(gold))
        mapping = None
    else:
        result = counter_f1(pred, gold, config, registry)
        mapping = result.mapping
    out.update(matched=result.matched, pred_total=result.pred_total,
               gold_total=result.gold_total, f1=result.f1)

    gold_keys = {
        (c.box, c.relation, tuple((t.kind, t.label) for t in c.args))
        for c in gold.clauses
    }
    if not isinstance(pred, IllFormedError):
        from .metrics.matching import apply_clause_mapping

        images = apply_clause_mapping(pred, mapping or {})
        for c, image in zip(pred.clauses, images):
            hit = mapping is not None and image in gold_keys
            for cat in _clause_categories(c):
                out["cat_pred"][cat] = out["cat_pred"].get(cat, 0) + 1
                if hit:
                    out["cat_matched"][cat] = out["cat_matched"].get(cat, 0) + 1
    for c in gold.clauses:
        for cat in _clause_categories(c):
            out["cat_gold"][cat] = out["cat_gold"].get(cat, 0) + 1
    return out


def _outcome_worker(task) -> dict:
    return _doc_outcome(*task)


def score_texts(ids: Sequence[str],
                pred_texts: Sequence[str],
                gold_texts: Sequence[str],
                mode: str = CLAUSE_MODE,
                fmt: str = CLAUSE_FORMAT,
                encoding: str = NATIVE_ENCODING,
                config: SearchConfig = SearchConfig(),
                jobs: int = 1,
                sources: Optional[Sequence[str]] = None,
                macro: bool = False) -> CorpusReport:
    """Score aligned document texts; the report is independent of ``jobs``."""
    if not (len(ids) == len(pred_texts) == len(gold_texts)):
        raise CorpusDataError(
            f"misaligned corpora: {len(pred_texts)} pred documents, "
            f"{len(gold_texts)} gold, {len(ids)} ids")
    if not ids:
        raise CorpusDataError("empty corpus")
    if sources is not None and len(sources) != len(ids):
        raise CorpusDataError(
            f"misaligned sources: {len(sources)} texts for {len(ids)} documents")
    if jobs < 1:
        raise ValueError("jobs must be >= 1")

    tasks = [
        (i, pred_texts[i], gold_texts[i], ids[i], mode, fmt, encoding,
         config.seed, config.restarts, config.exact_threshold)
        for i in range(len(ids))
    ]
    if jobs == 1:
        outcomes = [_doc_outcome(*t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_outcome_worker, tasks, chunksize=8))
    return _report_from_outcomes(outcomes, mode, sources, macro)


def _report_from_outcomes(outcomes: Sequence[dict], mode: str,
                          sources: Optional[Sequence[str]],
                          macro: bool) -> CorpusReport:
    from .metrics.scoring import CAT_ALL, DocAsResult, length_report

    doc_scores = []
    matched_sum = pred_sum = gold_sum = 0
    n_bad = 0
    cat_matched: dict[str, int] = {}
    cat_pred: dict[str, int] = {}
    cat_gold: dict[str, int] = {}
    for o in outcomes:
        doc_scores.append(DocScore(o["id"], o["matched"], o["pred_total"],
                                   o["gold_total"], o["f1"], o["well_formed"]))
        matched_sum += o["matched"]
        pred_sum += o["pred_total"]
        gold_sum += o["gold_total"]
        if not o["well_formed"]:
            n_bad += 1
        for key, acc in (("cat_matched", cat_matched), ("cat_pred", cat_pred),
                         ("cat_gold", cat_gold)):
            for cat, n in o[key].items():
                acc[cat] = acc.get(cat, 0) + n

    overall = MatchResult.from_counts(matched_sum, pred_sum, gold_sum)
    fine = None
    if mode == CLAUSE_MODE:
        categories = {
            cat: MatchResult.from_counts(
                cat_matched.get(cat, 0), cat_pred.get(cat, 0), cat_gold.get(cat, 0))
            for cat in set(cat_pred) | set(cat_gold) if cat != CAT_ALL
        }
        fine = FineGrainedReport(overall, categories)
    length_table = None
    if sources is not None:
        length_table = length_report(
            [(text, DocAsResult(d)) for text, d in zip(sources, doc_scores)])
    n = len(doc_scores)
    return CorpusReport(
        mode=mode,
        overall=overall,
        if_percent=round(100.0 * n_bad / n, 2),
        n_documents=n,
        n_ill_formed=n_bad,
        per_document=tuple(doc_scores),
        fine_grained=fine,
        length_table=length_table,
        macro_f1=(round(sum(d.f1 for d in doc_scores) / n, 6) if macro else None),
    )


# ---------------------------------------------------------------------------
# validation over text

def validate_texts(ids: Sequence[str], texts: Sequence[str], fmt: str,
                   registry: Optional[ArityRegistry] = None,
                   ) -> list[tuple[str, ValidationReport]]:
    """Lenient per-document validation: (id, report) per document."""
    from .validation import validate_sbn

    registry = registry or default_registry()
    out = []
    for doc_id, text in zip(ids, texts):
        doc = decode_pred(text, fmt, NATIVE_ENCODING, registry)
        if isinstance(doc, IllFormedError):
            report = ValidationReport.from_ill_formed(doc)
        elif isinstance(doc, ClauseSet):
            report = validate_clauses(doc, registry)
        else:
            report = validate_sbn(doc)
        out.append((doc_id, report))
    return out
