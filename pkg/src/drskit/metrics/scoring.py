"""Corpus-level scoring: fine-grained breakdowns, length buckets, micro F1.

The corpus scorer applies the ill-formedness policy: a prediction that
fails validation scores zero matched clauses/triples but still counts in
the denominators, and a structurally undecodable prediction contributes a
pred total of zero. The ill-formedness percentage comes from the validator
over the same documents.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

from ..core import (
    CONCEPT,
    DRS_OPERATOR,
    SEMANTIC_ROLE,
    Clause,
    ClauseSet,
    DrsGraph,
    IllFormedError,
)
from ..rand import derive_seed
from ..registry import ArityRegistry
from ..validation import ValidationReport, if_rate, validate_clauses
from .matching import (
    MappingMismatchError,
    MatchResult,
    SearchConfig,
    counter_f1,
    recount_clause_matches,
    smatch_f1,
)

CLAUSE_MODE = "clause"
GRAPH_MODE = "graph"

# fine-grained category keys, in report order
CAT_ALL = "all"
CAT_OPERATOR = DRS_OPERATOR
CAT_ROLE = SEMANTIC_ROLE
CAT_CONCEPT = CONCEPT
CAT_SYNSET = {"n": "synset-n", "v": "synset-v", "a": "synset-a", "r": "synset-r"}
CATEGORY_ORDER = (
    CAT_ALL, CAT_OPERATOR, CAT_ROLE, CAT_CONCEPT,
    "synset-n", "synset-v", "synset-a", "synset-r",
)


def _clause_categories(c: Clause) -> tuple[str, ...]:
    """Primary category plus, for sense-bearing concepts, the synset-POS row."""
    cat = c.category
    if cat != CONCEPT:
        return (cat,)
    syn = c.synset()
    if syn is None:
        return (CONCEPT,)
    return (CONCEPT, CAT_SYNSET[syn.pos])


@dataclass(frozen=True)
class FineGrainedReport:
    """Per-category match counts. Empty categories are absent."""

    overall: MatchResult
    categories: Mapping[str, MatchResult]

    def rows(self) -> list[tuple[str, MatchResult]]:
        out = [(CAT_ALL, self.overall)]
        for key in CATEGORY_ORDER[1:]:
            if key in self.categories:
                out.append((key, self.categories[key]))
        return out

    def to_dict(self) -> dict:
        return {key: r.to_dict() for key, r in self.rows()}


def fine_grained(
    pred: ClauseSet,
    gold: ClauseSet,
    mapping: Mapping[str, str],
    registry: Optional[ArityRegistry] = None,
) -> FineGrainedReport:
    """Break a scored clause pair down by relation category.

    ``mapping`` is the variable mapping from counter_f1 on the same pair.
    Every clause lands in exactly one primary category (operator / role /
    concept); sense-bearing concept clauses additionally land in their
    synset-POS row. Raises MappingMismatchError when the mapping mentions
    variables foreign to the pair.
    """
    pred_vars = set(pred.variable_index)
    gold_vars = set(gold.variable_index)
    for k, v in mapping.items():
        if k not in pred_vars:
            raise MappingMismatchError(f"mapping source {k!r} not in pred")
        if v not in gold_vars:
            raise MappingMismatchError(f"mapping target {v!r} not in gold")

    matched_counts: dict[str, int] = {}
    pred_counts: dict[str, int] = {}
    gold_counts: dict[str, int] = {}

    gold_keys = {
        (c.box, c.relation, tuple((t.kind, t.label) for t in c.args))
        for c in gold.clauses
    }
    from .matching import apply_clause_mapping  # local to avoid cycle at import

    images = apply_clause_mapping(pred, mapping)
    for c, image in zip(pred.clauses, images):
        hit = image in gold_keys
        for cat in _clause_categories(c):
            pred_counts[cat] = pred_counts.get(cat, 0) + 1
            if hit:
                matched_counts[cat] = matched_counts.get(cat, 0) + 1
    for c in gold.clauses:
        for cat in _clause_categories(c):
            gold_counts[cat] = gold_counts.get(cat, 0) + 1

    overall = MatchResult.from_counts(
        sum(1 for im in images if im in gold_keys), len(pred), len(gold), mapping
    )
    categories = {}
    for cat in set(pred_counts) | set(gold_counts):
        categories[cat] = MatchResult.from_counts(
            matched_counts.get(cat, 0),
            pred_counts.get(cat, 0),
            gold_counts.get(cat, 0),
        )
    return FineGrainedReport(overall, categories)


def _merge_counts(
    into_matched: dict, into_pred: dict, into_gold: dict,
    pred: Optional[ClauseSet], gold: ClauseSet,
    mapping: Optional[Mapping[str, str]],
) -> None:
    """Accumulate per-category counts for one document (pred may be None)."""
    gold_keys = {
        (c.box, c.relation, tuple((t.kind, t.label) for t in c.args))
        for c in gold.clauses
    }
    if pred is not None:
        from .matching import apply_clause_mapping

        images = apply_clause_mapping(pred, mapping or {})
        for c, image in zip(pred.clauses, images):
            hit = mapping is not None and image in gold_keys
            for cat in _clause_categories(c):
                into_pred[cat] = into_pred.get(cat, 0) + 1
                if hit:
                    into_matched[cat] = into_matched.get(cat, 0) + 1
    for c in gold.clauses:
        for cat in _clause_categories(c):
            into_gold[cat] = into_gold.get(cat, 0) + 1


# --------------------------------------------------------------------------
# length buckets

@dataclass(frozen=True)
class LengthRow:
    length: int
    count: int
    mean_f1: float


def length_report(
    pairs: Sequence[tuple[str, MatchResult]],
) -> tuple[LengthRow, ...]:
    """Mean F1 bucketed by whitespace token count of the source text.

    One row per occupied length, ascending.
    """
    buckets: dict[int, list[float]] = {}
    for text, result in pairs:
        n = len(text.split())
        buckets.setdefault(n, []).append(result.f1)
    rows = []
    for n in sorted(buckets):
        scores = buckets[n]
        rows.append(LengthRow(n, len(scores), sum(scores) / len(scores)))
    return tuple(rows)


# --------------------------------------------------------------------------
# corpus scoring

@dataclass(frozen=True)
class DocScore:
    doc_id: str
    matched: int
    pred_total: int
    gold_total: int
    f1: float
    well_formed: bool

    def to_dict(self) -> dict:
        return {
            "id": self.doc_id,
            "matched": self.matched,
            "pred_total": self.pred_total,
            "gold_total": self.gold_total,
            "f1": self.f1,
            "well_formed": self.well_formed,
        }


@dataclass(frozen=True)
class CorpusReport:
    mode: str
    overall: MatchResult
    if_percent: float
    n_documents: int
    n_ill_formed: int
    per_document: tuple[DocScore, ...]
    fine_grained: Optional[FineGrainedReport] = None
    length_table: Optional[tuple[LengthRow, ...]] = None
    macro_f1: Optional[float] = None


ClauseDoc = Union[ClauseSet, IllFormedError]
GraphDoc = Union[DrsGraph, IllFormedError]


def _score_one_clause_doc(pred, gold, report, config, registry):
    if isinstance(pred, IllFormedError):
        return MatchResult.from_counts(0, 0, len(gold)), None
    if not report.well_formed:
        # parseable but invalid: keep the denominator, score nothing
        return MatchResult.from_counts(0, len(pred), len(gold)), None
    result = counter_f1(pred, gold, config, registry)
    return result, result.mapping


def corpus_score(
    pred_docs: Sequence[tuple[str, Union[ClauseDoc, GraphDoc]]],
    gold_docs: Sequence[tuple[str, Union[ClauseSet, DrsGraph]]],
    mode: str = CLAUSE_MODE,
    config: SearchConfig = SearchConfig(),
    registry: Optional[ArityRegistry] = None,
    sources: Optional[Sequence[str]] = None,
    macro: bool = False,
) -> CorpusReport:
    """Micro-averaged corpus score over documents aligned by id.

    Each document gets its own seed derived from ``config.seed`` and the
    document index, so results are independent of scoring order. Clause
    mode also produces the fine-grained category breakdown; ``sources``
    (aligned raw texts) adds the per-length table.
    """
    if mode not in (CLAUSE_MODE, GRAPH_MODE):
        raise ValueError(f"unknown mode {mode!r}")
    if len(pred_docs) != len(gold_docs):
        raise ValueError(
            f"pred has {len(pred_docs)} documents, gold has {len(gold_docs)}"
        )
    if sources is not None and len(sources) != len(gold_docs):
        raise ValueError("sources must align with the document lists")

    doc_scores: list[DocScore] = []
    reports: list[ValidationReport] = []
    matched_sum = pred_sum = gold_sum = 0
    cat_matched: dict[str, int] = {}
    cat_pred: dict[str, int] = {}
    cat_gold: dict[str, int] = {}

    for index, ((pid, pred), (gid, gold)) in enumerate(zip(pred_docs, gold_docs)):
        if pid != gid:
            raise ValueError(f"document {index}: pred id {pid!r} != gold id {gid!r}")
        doc_config = SearchConfig(
            seed=derive_seed(config.seed, index),
            restarts=config.restarts,
            exact_threshold=config.exact_threshold,
        )
        if mode == CLAUSE_MODE:
            if isinstance(pred, IllFormedError):
                report = ValidationReport.from_ill_formed(pred)
            else:
                report = validate_clauses(pred, registry)
            reports.append(report)
            result, mapping = _score_one_clause_doc(
                pred, gold, report, doc_config, registry)
            _merge_counts(
                cat_matched, cat_pred, cat_gold,
                pred if not isinstance(pred, IllFormedError) else None,
                gold, mapping,
            )
        else:
            if isinstance(pred, IllFormedError):
                report = ValidationReport.from_ill_formed(pred)
                result = smatch_f1(pred, gold, doc_config)
            else:
                report = ValidationReport.clean()
                result = smatch_f1(pred, gold, doc_config)
            reports.append(report)

        matched_sum += result.matched
        pred_sum += result.pred_total
        gold_sum += result.gold_total
        doc_scores.append(DocScore(
            pid, result.matched, result.pred_total, result.gold_total,
            result.f1, report.well_formed,
        ))

    overall = MatchResult.from_counts(matched_sum, pred_sum, gold_sum)
    fine = None
    if mode == CLAUSE_MODE:
        categories = {}
        for cat in set(cat_pred) | set(cat_gold):
            if cat == CAT_ALL:
                continue
            categories[cat] = MatchResult.from_counts(
                cat_matched.get(cat, 0), cat_pred.get(cat, 0), cat_gold.get(cat, 0)
            )
        fine = FineGrainedReport(overall, categories)

    length_table = None
    if sources is not None:
        length_table = length_report(
            [(text, DocAsResult(d)) for text, d in zip(sources, doc_scores)]
        )

    return CorpusReport(
        mode=mode,
        overall=overall,
        if_percent=if_rate(reports) if reports else 0.0,
        n_documents=len(doc_scores),
        n_ill_formed=sum(1 for r in reports if not r.well_formed),
        per_document=tuple(doc_scores),
        fine_grained=fine,
        length_table=length_table,
        macro_f1=(
            round(sum(d.f1 for d in doc_scores) / len(doc_scores), 6)
            if macro and doc_scores else None
        ),
    )


class DocAsResult:
    """Adapter giving DocScore the .f1 face length_report expects."""

    def __init__(self, doc: DocScore):
        self.f1 = doc.f1
