"""Clause-level and graph-level F1 under an optimal variable/node mapping.

``counter_f1`` scores two clause sets by searching for the injective,
namespace-respecting variable mapping that maximizes exactly-matching
clauses. ``smatch_f1`` scores two graphs by decomposing them into triples
(instance, typed edge, membership) and searching over node
correspondences. Both share the same search kernel: exact enumeration up
to a size threshold, hill-climbing with restarts beyond it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from ..core import (
    BOX,
    BOX_NODE,
    CONSTANT,
    DISCOURSE_EDGE,
    MEMBER_EDGE,
    ROLE_EDGE,
    Clause,
    ClauseSet,
    DrsGraph,
    IllFormedError,
)
from ..registry import ArityRegistry
from ..validation import validate_clauses
from . import kernel

DEFAULT_RESTARTS = 4
DEFAULT_EXACT_THRESHOLD = 7


class GoldNotWellFormedError(ValueError):
    """The gold side of a scored pair failed validation."""


class MappingMismatchError(ValueError):
    """A supplied mapping references variables absent from the pair."""


@dataclass(frozen=True)
class SearchConfig:
    """Mapping-search settings.

    ``exact_threshold`` is the largest pred-side variable/node count still
    searched exhaustively; larger problems use hill-climbing with
    ``restarts`` seeded random restarts after the greedy start. Setting
    ``exact_threshold=0`` forces hill-climbing everywhere.
    """

    seed: int = 0
    restarts: int = DEFAULT_RESTARTS
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD

    def __post_init__(self):
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")
        if self.exact_threshold < 0:
            raise ValueError("exact_threshold must be >= 0")


@dataclass(frozen=True)
class MatchResult:
    """Outcome of one scored pair."""

    matched: int
    pred_total: int
    gold_total: int
    precision: float
    recall: float
    f1: float
    mapping: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def from_counts(
        cls,
        matched: int,
        pred_total: int,
        gold_total: int,
        mapping: Optional[Mapping[str, str]] = None,
    ) -> "MatchResult":
        if not 0 <= matched <= max(pred_total, 0):
            raise ValueError("matched exceeds pred_total")
        if matched > gold_total:
            raise ValueError("matched exceeds gold_total")
        p = matched / pred_total if pred_total else 0.0
        r = matched / gold_total if gold_total else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        return cls(matched, pred_total, gold_total, p, r, f, dict(mapping or {}))

    def to_dict(self) -> dict:
        return {
            "matched": self.matched,
            "pred_total": self.pred_total,
            "gold_total": self.gold_total,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass(frozen=True)
class MatchProblem:
    """Kernel-ready encoding of one pair plus the name tables."""

    n_pred: int
    n_gold: int
    pred_names: tuple[str, ...]
    gold_names: tuple[str, ...]
    pair_offsets: list
    pair_pred: list
    pair_gold: list
    cand_offsets: list
    cand_gold: list
    pred_total: int
    gold_total: int


def _index(names: list[str]) -> dict[str, int]:
    return {name: i for i, name in enumerate(names)}


def _compatible_constraints(slots_p, slots_g):
    """Variable constraints forcing item_p onto item_g, or None.

    ``slots_*`` are aligned lists of (kind, label). Returns None when any
    slot disagrees on statics or the required variable couples cannot form
    an injective partial function.
    """
    fwd: dict[str, str] = {}
    rev: dict[str, str] = {}
    for (kp, lp), (kg, lg) in zip(slots_p, slots_g):
        if kp == CONSTANT or kg == CONSTANT:
            if kp != kg or lp != lg:
                return None
            continue
        if kp != kg:
            return None
        if fwd.get(lp, lg) != lg or rev.get(lg, lp) != lp:
            return None
        fwd[lp] = lg
        rev[lg] = lp
    return tuple(sorted(fwd.items()))


def _build_problem(pred_items, gold_items, pred_names, gold_names) -> MatchProblem:
    """pred_items/gold_items: lists of (static_key, slots)."""
    p_idx = _index(pred_names)
    g_idx = _index(gold_names)
    by_static: dict = {}
    for j, (key, _) in enumerate(gold_items):
        by_static.setdefault(key, []).append(j)

    pair_offsets = [0]
    pair_pred: list[int] = []
    pair_gold: list[int] = []
    cand_sets: list[set[int]] = [set() for _ in pred_names]
    for i, (key, slots_p) in enumerate(pred_items):
        for j in by_static.get(key, ()):
            cons = _compatible_constraints(slots_p, gold_items[j][1])
            if cons is None:
                continue
            for lp, lg in cons:
                pair_pred.append(p_idx[lp])
                pair_gold.append(g_idx[lg])
                cand_sets[p_idx[lp]].add(g_idx[lg])
            pair_offsets.append(len(pair_pred))

    cand_offsets = [0]
    cand_gold: list[int] = []
    for s in cand_sets:
        cand_gold.extend(sorted(s))
        cand_offsets.append(len(cand_gold))
    return MatchProblem(
        n_pred=len(pred_names),
        n_gold=len(gold_names),
        pred_names=tuple(pred_names),
        gold_names=tuple(gold_names),
        pair_offsets=pair_offsets,
        pair_pred=pair_pred,
        pair_gold=pair_gold,
        cand_offsets=cand_offsets,
        cand_gold=cand_gold,
        pred_total=len(pred_items),
        gold_total=len(gold_items),
    )


def _solve(problem: MatchProblem, config: SearchConfig) -> tuple[int, dict[str, str]]:
    use_exact = problem.n_pred <= config.exact_threshold
    matched, mapping = kernel.solve(
        problem.n_pred, problem.n_gold,
        problem.pair_offsets, problem.pair_pred, problem.pair_gold,
        problem.cand_offsets, problem.cand_gold,
        config.seed, config.restarts, use_exact,
    )
    names = {
        problem.pred_names[p]: problem.gold_names[g]
        for p, g in enumerate(mapping)
        if g >= 0
    }
    return matched, names


# --------------------------------------------------------------------------
# clause scoring

def _clause_order(cs: ClauseSet) -> list[str]:
    """Variables in first-occurrence order (box field first, then args)."""
    seen: list[str] = []
    have = set()
    for c in cs.clauses:
        for label, _ in c.variables():
            if label not in have:
                have.add(label)
                seen.append(label)
    return seen


def _clause_item(c: Clause):
    statics = [c.relation, len(c.args)]
    slots = [(BOX, c.box)]
    for t in c.args:
        if t.kind == CONSTANT:
            statics.append(t.label)
            slots.append((CONSTANT, t.label))
        else:
            statics.append(None)
            slots.append((t.kind, t.label))
    return tuple(statics), slots


def build_clause_problem(pred: ClauseSet, gold: ClauseSet) -> MatchProblem:
    return _build_problem(
        [_clause_item(c) for c in pred.clauses],
        [_clause_item(c) for c in gold.clauses],
        _clause_order(pred), _clause_order(gold),
    )


def apply_clause_mapping(cs: ClauseSet, mapping: Mapping[str, str]):
    """Rename variables through ``mapping``; unmapped variables map to a
    reserved name that can never occur in gold, so their clauses miss."""
    out = []
    for c in cs.clauses:
        box = mapping.get(c.box, f"\x00{c.box}")
        args = []
        for t in c.args:
            if t.is_variable:
                args.append((t.kind, mapping.get(t.label, f"\x00{t.label}")))
            else:
                args.append((CONSTANT, t.label))
        out.append((box, c.relation, tuple(args)))
    return out


def recount_clause_matches(pred: ClauseSet, gold: ClauseSet,
                           mapping: Mapping[str, str]) -> int:
    """Matched-clause count recomputed directly from a mapping.

    Independent of the search kernel; used to cross-check its score and to
    build the fine-grained breakdown.
    """
    gold_keys = {
        (c.box, c.relation, tuple((t.kind, t.label) for t in c.args))
        for c in gold.clauses
    }
    return sum(1 for key in apply_clause_mapping(pred, mapping) if key in gold_keys)


def counter_f1(
    pred: Union[ClauseSet, IllFormedError],
    gold: ClauseSet,
    config: SearchConfig = SearchConfig(),
    registry: Optional[ArityRegistry] = None,
) -> MatchResult:
    """Clause F1 under the best variable mapping found by the search.

    ``pred`` may be an IllFormedError (an undecodable model output); it
    then scores zero matched with pred_total 0. Gold must validate.
    """
    gold_report = validate_clauses(gold, registry)
    if not gold_report.well_formed:
        first = gold_report.errors[0]
        raise GoldNotWellFormedError(
            f"gold clause set invalid: {first.error_class} at {first.location}: "
            f"{first.detail}"
        )
    if isinstance(pred, IllFormedError):
        return MatchResult.from_counts(0, 0, len(gold))
    problem = build_clause_problem(pred, gold)
    matched, mapping = _solve(problem, config)
    return MatchResult.from_counts(matched, problem.pred_total,
                                   problem.gold_total, mapping)


# --------------------------------------------------------------------------
# graph scoring

def graph_triples(g: DrsGraph) -> list[tuple]:
    """Triple decomposition: (kind, label, nodes...).

    Instance triples label predicate and entity nodes (boxes are opaque);
    edge triples are typed by edge kind; membership triples carry no label.
    """
    triples: list[tuple] = []
    for n in g.nodes:
        if n.kind != BOX_NODE:
            triples.append(("instance", n.label, n.id))
    for e in g.edges:
        triples.append((e.kind, e.label, e.src, e.dst))
    return triples


def _graph_items(g: DrsGraph):
    items = []
    for t in graph_triples(g):
        kind, label = t[0], t[1]
        nodes = t[2:]
        key = (kind, label, len(nodes))
        slots = [("node", f"n{n}") for n in nodes]
        items.append((key, slots))
    return items


def build_graph_problem(pred: DrsGraph, gold: DrsGraph) -> MatchProblem:
    pred_names = [f"n{n.id}" for n in pred.nodes]
    gold_names = [f"n{n.id}" for n in gold.nodes]
    return _build_problem(
        _graph_items(pred), _graph_items(gold), pred_names, gold_names,
    )


def recount_graph_matches(pred: DrsGraph, gold: DrsGraph,
                          mapping: Mapping[str, str]) -> int:
    """Matched-triple count recomputed directly from a node mapping."""
    gold_set = set(graph_triples(gold))
    total = 0
    for t in graph_triples(pred):
        nodes = []
        ok = True
        for n in t[2:]:
            name = mapping.get(f"n{n}")
            if name is None:
                ok = False
                break
            nodes.append(int(name[1:]))
        if ok and (t[0], t[1], *nodes) in gold_set:
            total += 1
    return total


def smatch_f1(
    pred: Union[DrsGraph, IllFormedError],
    gold: DrsGraph,
    config: SearchConfig = SearchConfig(),
) -> MatchResult:
    """Triple F1 under the best node correspondence found by the search.

    The mapping keys are node references of the form ``n<id>``.
    """
    if isinstance(pred, IllFormedError):
        return MatchResult.from_counts(0, 0, len(graph_triples(gold)))
    problem = build_graph_problem(pred, gold)
    matched, mapping = _solve(problem, config)
    return MatchResult.from_counts(matched, problem.pred_total,
                                   problem.gold_total, mapping)
