"""Brute-force reference implementations the fast code is tested against.

Everything here favors obviousness over speed: exhaustive enumeration of
variable/node mappings, dense matrix algebra, no shared code with the
package internals beyond the public data types.
"""
from __future__ import annotations

from itertools import combinations, permutations

import numpy as np

from drskit.core import BOX, CONSTANT, ENTITY, ClauseSet, DrsGraph

BOX_NODE = "box"


def _f1(matched: int, pred_total: int, gold_total: int) -> float:
    p = matched / pred_total if pred_total else 0.0
    r = matched / gold_total if gold_total else 0.0
    return 2 * p * r / (p + r) if p + r else 0.0


# ---------------------------------------------------------------------------
# clause matching by exhaustive injective mapping

def _vars_of(cs: ClauseSet, kind: str) -> list[str]:
    seen = []
    for c in cs.clauses:
        labels = [c.box] if kind == BOX else []
        labels += [t.label for t in c.args if t.kind == kind]
        for lab in labels:
            if lab not in seen:
                seen.append(lab)
    return seen


def _injective_maps(pred_vars: list[str], gold_vars: list[str]):
    """Every injective partial mapping pred_vars -> gold_vars."""
    n = len(pred_vars)
    for k in range(min(n, len(gold_vars)) + 1):
        for chosen in combinations(range(n), k):
            for image in permutations(gold_vars, k):
                yield dict(zip((pred_vars[i] for i in chosen), image))


def _mapped_clause(c, box_map, ent_map):
    args = []
    for t in c.args:
        if t.kind == CONSTANT:
            args.append((CONSTANT, t.label))
        elif t.kind == BOX:
            args.append((BOX, box_map.get(t.label, ("?", t.label))))
        else:
            args.append((ENTITY, ent_map.get(t.label, ("?", t.label))))
    return (box_map.get(c.box, ("?", c.box)), c.relation, tuple(args))


def oracle_clause_counts(pred: ClauseSet, gold: ClauseSet):
    """(matched, pred_total, gold_total) under the best mapping, by trying
    every injective box mapping crossed with every injective entity
    mapping. Exponential; only for small inputs."""
    gold_set = {
        (c.box, c.relation, tuple((t.kind, t.label) for t in c.args))
        for c in gold.clauses
    }
    pb, gb = _vars_of(pred, BOX), _vars_of(gold, BOX)
    pe, ge = _vars_of(pred, ENTITY), _vars_of(gold, ENTITY)
    best = 0
    for box_map in _injective_maps(pb, gb):
        for ent_map in _injective_maps(pe, ge):
            matched = sum(
                1 for c in pred.clauses
                if _mapped_clause(c, box_map, ent_map) in gold_set
            )
            best = max(best, matched)
    return best, len(pred.clauses), len(gold.clauses)


def oracle_clause_f1(pred: ClauseSet, gold: ClauseSet) -> float:
    return _f1(*oracle_clause_counts(pred, gold))


# ---------------------------------------------------------------------------
# graph matching by exhaustive injective node mapping

def _own_triples(g: DrsGraph):
    """Re-derive the triple view straight from the data type."""
    triples = []
    for n in g.nodes:
        if n.kind != BOX_NODE:
            triples.append(("instance", n.label, (n.id,)))
    for e in g.edges:
        triples.append((e.kind, e.label, (e.src, e.dst)))
    return triples


def oracle_graph_counts(pred: DrsGraph, gold: DrsGraph):
    """Best matched-triple count over every injective node mapping.

    Mapping candidates per pred node are the gold nodes that share a
    triple signature at the same slot; anything else can never satisfy a
    triple, so skipping it loses nothing.
    """
    pt = _own_triples(pred)
    gt = _own_triples(gold)
    gold_set = set()
    for kind, label, nodes in gt:
        gold_set.add((kind, label, nodes))

    cand: dict[int, set[int]] = {n.id: set() for n in pred.nodes}
    for pk, pl, pn in pt:
        for gk, gl, gn in gt:
            if (pk, pl, len(pn)) != (gk, gl, len(gn)):
                continue
            for a, b in zip(pn, gn):
                cand[a].add(b)

    pred_ids = [n.id for n in pred.nodes]
    best = 0

    def count(assign: dict[int, int]) -> int:
        total = 0
        for kind, label, nodes in pt:
            image = tuple(assign.get(n, -1 - n) for n in nodes)
            if (kind, label, image) in gold_set:
                total += 1
        return total

    def walk(i: int, assign: dict[int, int], used: set[int]):
        nonlocal best
        if i == len(pred_ids):
            best = max(best, count(assign))
            return
        p = pred_ids[i]
        walk(i + 1, assign, used)          # leave p unmapped
        for gval in sorted(cand[p]):
            if gval in used:
                continue
            assign[p] = gval
            used.add(gval)
            walk(i + 1, assign, used)
            used.discard(gval)
            del assign[p]

    walk(0, {}, set())
    return best, len(pt), len(gt)


def oracle_graph_f1(pred: DrsGraph, gold: DrsGraph) -> float:
    return _f1(*oracle_graph_counts(pred, gold))


# ---------------------------------------------------------------------------
# kernel problems in raw array form

def oracle_solve_problem(n_pred, n_gold, pair_offsets, pair_pred, pair_gold,
                         cand_offsets, cand_gold) -> int:
    """Best satisfied-pair count by enumerating every injective assignment
    built from the candidate lists (plus unmapped)."""
    n_pairs = len(pair_offsets) - 1
    cands = [
        list(cand_gold[cand_offsets[p]:cand_offsets[p + 1]])
        for p in range(n_pred)
    ]
    best = 0

    def satisfied(assign) -> int:
        total = 0
        for k in range(n_pairs):
            ok = True
            for e in range(pair_offsets[k], pair_offsets[k + 1]):
                if assign[pair_pred[e]] != pair_gold[e]:
                    ok = False
                    break
            if ok:
                total += 1
        return total

    assign = [-1] * n_pred

    def walk(p: int, used: set):
        nonlocal best
        if p == n_pred:
            best = max(best, satisfied(assign))
            return
        walk(p + 1, used)
        for gval in cands[p]:
            if gval in used:
                continue
            assign[p] = gval
            used.add(gval)
            walk(p + 1, used)
            used.discard(gval)
            assign[p] = -1

    walk(0, set())
    return best


# ---------------------------------------------------------------------------
# adapter numerics

def dense_lora_forward(layer, x) -> np.ndarray:
    """The adapted projection computed the expensive way: materialize
    W0 + B A, then multiply."""
    return (np.asarray(layer.W0) + np.asarray(layer.B) @ np.asarray(layer.A)) @ np.asarray(x)
