"""Seeded generators and fault injectors for tests and benchmarks.

Generators draw from a caller-supplied random.Random so fixtures are
reproducible, and produce inputs that are well-formed by construction
(the property tests double-check that against the validator). Each fault
injector plants exactly one defect and returns the error class and the
clause/item index where the validator must report it.
"""
from __future__ import annotations

import random
from functools import lru_cache
from typing import Optional

import numpy as np

from .core import (
    CONCEPT,
    DRS_OPERATOR,
    DUPLICATE_ROLE,
    FREE_VARIABLE,
    ILLEGAL_CLAUSE_STRUCTURE,
    OFFSET_OUT_OF_RANGE,
    Clause,
    ClauseSet,
    DrsGraph,
    Edge,
    Node,
    Satellite,
    SbnItem,
    SequentialGraph,
    SynsetId,
    constant,
    relation_category,
    variable,
)
from .lora import LoraLayer
from .registry import ArityRegistry, default_registry

LEMMAS = (
    "male", "female", "person", "city", "event", "book", "house",
    "climb_up", "speak", "own", "give", "read", "small", "fast",
    "telephone_pole", "time",
)
POS_TAGS = ("n", "v", "a", "r")
CONSTANT_POOL = ("tom", "mary", "2", "yesterday", "now")


@lru_cache(maxsize=None)
def _relations_by_shape(argkinds: str, category: str) -> tuple[str, ...]:
    reg = default_registry()
    return tuple(sorted(
        r for r in reg.relations()
        if relation_category(r) == category
        and reg.lookup(r).argkinds == argkinds
    ))


def _roles() -> tuple[str, ...]:
    return _relations_by_shape("tt", "semantic-role")


def _comparisons() -> tuple[str, ...]:
    return _relations_by_shape("tt", DRS_OPERATOR)


def _unary_box_ops() -> tuple[str, ...]:
    return _relations_by_shape("b", DRS_OPERATOR)


def _binary_box_ops() -> tuple[str, ...]:
    return _relations_by_shape("bb", DRS_OPERATOR)


# ---------------------------------------------------------------------------
# clause sets

def random_clause_set(rng: random.Random, max_boxes: int = 2,
                      max_entities: int = 3, max_extra: int = 4) -> ClauseSet:
    """A well-formed clause set: every entity is introduced by a binding
    clause and described by a concept; extras add roles, comparisons, and
    box operators. The result converts to graph form cleanly (no repeated
    role on one source, no role self-loops)."""
    n_boxes = rng.randint(1, max_boxes)
    boxes = [f"b{i + 1}" for i in range(n_boxes)]
    n_ent = rng.randint(1, max_entities)
    xs = [f"x{i + 1}" for i in range(n_ent)]
    home = {x: rng.choice(boxes) for x in xs}

    clauses = []
    for x in xs:
        clauses.append(Clause(home[x], "REF", (variable(x),)))
    for x in xs:
        lemma = rng.choice(LEMMAS)
        sense = f"{rng.choice(POS_TAGS)}.{rng.randint(1, 20):02d}"
        clauses.append(Clause(home[x], lemma, (constant(sense), variable(x))))

    populated = sorted(set(home.values()))
    used_edges = set()
    for _ in range(rng.randint(0, max_extra)):
        kind = rng.choice(("role", "role", "comparison", "box-op"))
        if kind in ("role", "comparison"):
            src = rng.choice(xs)
            others = [x for x in xs if x != src]
            if others and rng.random() < 0.7:
                dst = variable(rng.choice(others))
            else:
                dst = constant(rng.choice(CONSTANT_POOL))
            rel = rng.choice(_roles() if kind == "role" else _comparisons())
            if (src, rel) in used_edges:
                continue
            used_edges.add((src, rel))
            clauses.append(Clause(home[src], rel, (variable(src), dst)))
        else:
            if len(populated) < 2:
                continue
            a, b = rng.sample(populated, 2)
            if rng.random() < 0.5:
                clauses.append(Clause(a, rng.choice(_unary_box_ops()),
                                      (variable(b),)))
            else:
                clauses.append(Clause(a, rng.choice(_binary_box_ops()),
                                      (variable(a), variable(b))))
    return ClauseSet.from_clauses(clauses)


def rename_clause_variables(cs: ClauseSet, rng: random.Random) -> ClauseSet:
    """Consistently rename every box and entity variable to a fresh name;
    the result is equivalent up to variable naming."""
    boxes = sorted({c.box for c in cs.clauses}
                   | {t.label for c in cs.clauses for t in c.args
                      if t.is_variable and t.kind == "box"})
    ents = sorted({t.label for c in cs.clauses for t in c.args
                   if t.is_variable and t.kind == "entity"})
    new_box = [f"b{50 + i}" for i in range(len(boxes))]
    new_ent = [f"x{50 + i}" for i in range(len(ents))]
    rng.shuffle(new_box)
    rng.shuffle(new_ent)
    mapping = dict(zip(boxes, new_box))
    mapping.update(zip(ents, new_ent))

    def rename_term(t):
        return variable(mapping[t.label]) if t.is_variable else t

    return ClauseSet.from_clauses([
        Clause(mapping[c.box], c.relation, tuple(rename_term(t) for t in c.args))
        for c in cs.clauses
    ])


def random_clause_pair(rng: random.Random, **kwargs) -> tuple[ClauseSet, ClauseSet]:
    """A correlated (pred, gold) pair: pred is gold with renamed variables,
    some clauses dropped, and an occasional relabeled concept — partial
    overlap makes the mapping search nontrivial."""
    gold = random_clause_set(rng, **kwargs)
    pred_clauses = list(rename_clause_variables(gold, rng).clauses)
    drop = rng.randint(0, max(0, len(pred_clauses) - 1) // 3)
    for _ in range(drop):
        pred_clauses.pop(rng.randrange(len(pred_clauses)))
    if pred_clauses and rng.random() < 0.5:
        i = rng.randrange(len(pred_clauses))
        c = pred_clauses[i]
        if c.category == CONCEPT and len(c.args) == 2:
            pred_clauses[i] = Clause(c.box, rng.choice(LEMMAS), c.args)
    return ClauseSet.from_clauses(pred_clauses), gold


# ---------------------------------------------------------------------------
# sequential graphs

def random_sbn(rng: random.Random, min_items: int = 1, max_items: int = 5,
               with_satellites: bool = True) -> SequentialGraph:
    """A well-formed sequential graph: in-range nonzero offsets, no role
    repeated on one item."""
    n = rng.randint(min_items, max_items)
    items = []
    for i in range(n):
        if rng.random() < 0.15:
            head = rng.choice(CONSTANT_POOL)
        else:
            head = SynsetId(rng.choice(LEMMAS), rng.choice(POS_TAGS),
                            f"{rng.randint(1, 20):02d}")
        sats = []
        if with_satellites and n > 1:
            used_roles = set()
            for _ in range(rng.randint(0, 2)):
                role = rng.choice(_roles())
                if role in used_roles:
                    continue
                used_roles.add(role)
                target = rng.choice([t for t in range(n) if t != i])
                sats.append(Satellite(role, target - i))
        items.append(SbnItem(head, tuple(sats)))
    return SequentialGraph(tuple(items))


def permute_graph_nodes(g: DrsGraph, rng: random.Random) -> DrsGraph:
    """An isomorphic copy with node ids permuted."""
    n = len(g.nodes)
    perm = list(range(n))
    rng.shuffle(perm)
    nodes = [None] * n
    for node in g.nodes:
        nodes[perm[node.id]] = Node(perm[node.id], node.kind, node.label)
    edges = tuple(Edge(e.kind, perm[e.src], perm[e.dst], e.label)
                  for e in g.edges)
    return DrsGraph(tuple(nodes), edges)


# ---------------------------------------------------------------------------
# fault injectors: one defect, known class, known location

def inject_illegal_clause_structure(cs: ClauseSet, rng: random.Random,
                                    ) -> tuple[ClauseSet, str, int]:
    """Give one concept clause a third argument (its own entity repeated),
    breaking the two-place concept signature and nothing else."""
    spots = [i for i, c in enumerate(cs.clauses)
             if c.category == CONCEPT and len(c.args) == 2
             and c.args[1].is_variable]
    i = rng.choice(spots)
    c = cs.clauses[i]
    bad = Clause(c.box, c.relation, c.args + (c.args[1],))
    clauses = list(cs.clauses)
    clauses[i] = bad
    return ClauseSet.from_clauses(clauses), ILLEGAL_CLAUSE_STRUCTURE, i


def inject_free_variable(cs: ClauseSet, rng: random.Random,
                         registry: Optional[ArityRegistry] = None,
                         ) -> tuple[ClauseSet, str, int]:
    """Swap one non-binding variable argument for a fresh, never-introduced
    variable of the same kind."""
    registry = registry or default_registry()
    spots = []
    for i, c in enumerate(cs.clauses):
        sig = registry.signature_for(c.relation)
        if sig is None or sig.arity != len(c.args):
            continue
        binding = set(sig.binding_positions())
        for pos, t in enumerate(c.args):
            if t.is_variable and pos not in binding:
                spots.append((i, pos))
    i, pos = rng.choice(spots)
    c = cs.clauses[i]
    old = c.args[pos]
    fresh = variable(f"{old.label[0]}{900 + rng.randrange(100)}")
    args = tuple(fresh if p == pos else t for p, t in enumerate(c.args))
    clauses = list(cs.clauses)
    clauses[i] = Clause(c.box, c.relation, args)
    return ClauseSet.from_clauses(clauses), FREE_VARIABLE, i


def inject_offset_out_of_range(sbn: SequentialGraph, rng: random.Random,
                               ) -> tuple[SequentialGraph, str, int]:
    """Point one satellite outside the item range."""
    n = len(sbn.items)
    spots = [i for i, item in enumerate(sbn.items) if item.satellites]
    if not spots:
        raise ValueError("document has no satellite to corrupt")
    i = rng.choice(spots)
    item = sbn.items[i]
    j = rng.randrange(len(item.satellites))
    if rng.random() < 0.5:
        offset = (n - i) + rng.randrange(3)        # target >= n
    else:
        offset = -(i + 1 + rng.randrange(3))       # target < 0
    sats = tuple(Satellite(s.role, offset) if p == j else s
                 for p, s in enumerate(item.satellites))
    items = tuple(SbnItem(it.head, sats) if p == i else it
                  for p, it in enumerate(sbn.items))
    return SequentialGraph(items), OFFSET_OUT_OF_RANGE, i


def inject_duplicate_role(sbn: SequentialGraph, rng: random.Random,
                          ) -> tuple[SequentialGraph, str, int]:
    """Repeat an existing role on its item, pointing at a valid target."""
    n = len(sbn.items)
    spots = [i for i, item in enumerate(sbn.items) if item.satellites]
    if not spots:
        raise ValueError("document has no satellite to duplicate")
    i = rng.choice(spots)
    item = sbn.items[i]
    role = rng.choice(item.satellites).role
    target = rng.choice([t for t in range(n) if t != i])
    items = tuple(
        SbnItem(it.head, it.satellites + (Satellite(role, target - i),))
        if p == i else it
        for p, it in enumerate(sbn.items))
    return SequentialGraph(items), DUPLICATE_ROLE, i


# ---------------------------------------------------------------------------
# adapter layers

def random_lora_layer(rng: np.random.Generator, max_dim: int = 16,
                      max_rank: int = 4) -> LoraLayer:
    """A small random layer with a legal rank (1 <= r < min(d, k))."""
    d = int(rng.integers(2, max_dim + 1))
    k = int(rng.integers(2, max_dim + 1))
    r = int(rng.integers(1, min(min(d, k) - 1, max_rank) + 1))
    return LoraLayer(rng.standard_normal((d, k)),
                     rng.standard_normal((d, r)),
                     rng.standard_normal((r, k)))
