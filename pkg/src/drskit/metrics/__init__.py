"""Matching metrics: clause-level F1 and graph-triple F1 over a shared kernel."""
from .kernel import COMPILED, KERNEL_NAME
from .matching import (
    DEFAULT_EXACT_THRESHOLD,
    DEFAULT_RESTARTS,
    GoldNotWellFormedError,
    MappingMismatchError,
    MatchResult,
    SearchConfig,
    apply_clause_mapping,
    build_clause_problem,
    build_graph_problem,
    counter_f1,
    graph_triples,
    recount_clause_matches,
    recount_graph_matches,
    smatch_f1,
)
from .scoring import (
    CLAUSE_MODE,
    GRAPH_MODE,
    CorpusReport,
    DocScore,
    FineGrainedReport,
    LengthRow,
    corpus_score,
    fine_grained,
    length_report,
)

__all__ = [
    "COMPILED",
    "KERNEL_NAME",
    "DEFAULT_EXACT_THRESHOLD",
    "DEFAULT_RESTARTS",
    "GoldNotWellFormedError",
    "MappingMismatchError",
    "MatchResult",
    "SearchConfig",
    "apply_clause_mapping",
    "build_clause_problem",
    "build_graph_problem",
    "counter_f1",
    "graph_triples",
    "recount_clause_matches",
    "recount_graph_matches",
    "smatch_f1",
    "CLAUSE_MODE",
    "GRAPH_MODE",
    "CorpusReport",
    "DocScore",
    "FineGrainedReport",
    "LengthRow",
    "corpus_score",
    "fine_grained",
    "length_report",
]
