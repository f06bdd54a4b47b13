"""Conversions between clause form, graph form and sequential form.

clauses_to_graph erases variables: referents declared by concept clauses
become predicate nodes, constants become entity nodes, boxes become dummy
nodes, and no variable-name string survives into the output.

graph_to_sbn / sbn_to_graph translate between the graph and its sequential
rendering. Item order is caller business (surface order, normally); a
deterministic topological-then-lexicographic fallback is provided.
"""
from __future__ import annotations

import heapq
from typing import Optional, Sequence

from .core import (
    BOX,
    BOX_NODE,
    CONSTANT,
    DISCOURSE_EDGE,
    DUPLICATE_ROLE,
    ENTITY,
    MEMBER_EDGE,
    PREDICATE,
    ROLE_EDGE,
    ClauseSet,
    DrsGraph,
    GraphBuilder,
    SbnItem,
    Satellite,
    SequentialGraph,
    SynsetId,
    looks_like_synset,
    synset_parse,
)
from .registry import ArityRegistry, default_registry
from .validation import ValidationError, ValidationReport, validate_clauses, validate_sbn

REF = "REF"


class NotWellFormedError(ValueError):
    """Converter input failed validation; carries the offending report."""

    def __init__(self, report: ValidationReport, what: str = "input"):
        first = report.errors[0]
        super().__init__(
            f"{what} is not well-formed: {first.error_class} at "
            f"{first.location}: {first.detail}"
            + (f" (+{len(report.errors) - 1} more)" if len(report.errors) > 1 else "")
        )
        self.report = report


class OrderError(ValueError):
    """graph_to_sbn received an unusable item order."""


def clauses_to_graph(
    cs: ClauseSet,
    registry: Optional[ArityRegistry] = None,
) -> DrsGraph:
    """Convert a well-formed clause set to its variable-free graph.

    Rules, applied in document order:

    * every distinct box label becomes one box-dummy node;
    * REF clauses are dropped (their binding work is done);
    * a concept clause turns its referent into a predicate node labeled
      with the synset and adds a membership edge to the clause's box
      (first declaration wins if a referent is declared twice);
    * referents never declared by any concept become entity nodes labeled
      "entity" so that no variable name leaks into the graph;
    * constants become entity nodes, one per distinct text;
    * a two-argument clause over boxes becomes a discourse-relation edge;
      over non-boxes, a semantic-role edge between the argument nodes;
      mixed (term, box) clauses become a discourse-relation edge from the
      clause's own box to the argument box (the term link is dropped);
    * one-argument operator clauses over a box (NOT, POS, NEC) become a
      discourse-relation edge from the clause's own box to the argument.

    Raises NotWellFormedError when validation fails or when two clauses
    would emit the same (source, role) edge twice (reported as the
    duplicate-role class).
    """
    registry = registry or default_registry()
    report = validate_clauses(cs, registry)
    if not report.well_formed:
        raise NotWellFormedError(report, "clause set")

    # reject duplicate (source, role) pairs up front so the builder never
    # throws; only clauses that emit role edges count (concept clauses
    # declare nodes, and repeated declarations are allowed)
    seen_edges: dict[tuple, int] = {}
    for i, c in enumerate(cs.clauses):
        if c.relation == REF or c.category == "concept" or len(c.args) != 2:
            continue
        a, b = c.args
        if a.kind != BOX and b.kind != BOX:
            key = (a.kind, a.label, c.relation)
            if key in seen_edges:
                raise NotWellFormedError(
                    ValidationReport((ValidationError(
                        DUPLICATE_ROLE, i,
                        f"{c.relation} out of {a.label} already emitted by "
                        f"clause {seen_edges[key]}",
                    ),)),
                    "clause set",
                )
            seen_edges[key] = i

    builder = GraphBuilder()

    box_node: dict[str, int] = {}
    for c in cs.clauses:
        if c.box not in box_node:
            box_node[c.box] = builder.add_box()

    # predicate nodes from concept declarations (first one wins)
    var_node: dict[str, int] = {}
    for c in cs.clauses:
        if c.category != "concept" or len(c.args) != 2:
            continue
        ref = c.args[1]
        if not ref.is_variable or ref.label in var_node:
            continue
        syn = c.synset()
        label = syn.render() if syn else f"{c.relation}.{c.args[0].label}"
        node = builder.add_predicate(label)
        var_node[ref.label] = node
        builder.add_membership(node, box_node[c.box])

    # remaining referents: anonymous entity nodes
    for c in cs.clauses:
        for t in c.args:
            if t.kind == ENTITY and t.label not in var_node:
                var_node[t.label] = builder.add_entity("entity")

    entity_node: dict[str, int] = {}

    def term_node(term) -> int:
        if term.kind == CONSTANT:
            if term.label not in entity_node:
                entity_node[term.label] = builder.add_entity(term.label)
            return entity_node[term.label]
        return var_node[term.label]

    for c in cs.clauses:
        if c.relation == REF or c.category == "concept":
            continue
        kinds = tuple(t.kind for t in c.args)
        if len(c.args) == 1:
            if kinds[0] == BOX:
                builder.add_discourse(
                    box_node[c.box], box_node[c.args[0].label], c.relation
                )
            # a one-argument relation over a term has no graph rendering
            continue
        if len(c.args) == 2:
            a, b = c.args
            if a.kind == BOX and b.kind == BOX:
                builder.add_discourse(
                    box_node[a.label], box_node[b.label], c.relation
                )
            elif a.kind != BOX and b.kind != BOX:
                builder.add_role(term_node(a), term_node(b), c.relation)
            else:
                arg_box = a if a.kind == BOX else b
                builder.add_discourse(
                    box_node[c.box], box_node[arg_box.label], c.relation
                )
    return builder.build()


def default_item_order(g: DrsGraph) -> list[int]:
    """Deterministic fallback order over predicate and entity nodes:
    topological along role edges (sources first), ties and cycles broken
    by (label, id)."""
    item_nodes = [n for n in g.nodes if n.kind in (PREDICATE, ENTITY)]
    ids = {n.id for n in item_nodes}
    indeg = {i: 0 for i in ids}
    out: dict[int, list[int]] = {i: [] for i in ids}
    for e in g.edges:
        if e.kind == ROLE_EDGE:
            out[e.src].append(e.dst)
            indeg[e.dst] += 1
    key = {n.id: (n.label, n.id) for n in item_nodes}
    heap = [key[i] for i in ids if indeg[i] == 0]
    heapq.heapify(heap)
    order: list[int] = []
    remaining = set(ids)
    while remaining:
        if not heap:  # cycle: release the smallest remaining key
            heapq.heappush(heap, min(key[i] for i in remaining))
        _, nid = heapq.heappop(heap)
        if nid not in remaining:
            continue
        remaining.discard(nid)
        order.append(nid)
        for dst in out[nid]:
            indeg[dst] -= 1
            if indeg[dst] == 0 and dst in remaining:
                heapq.heappush(heap, key[dst])
    return order


def graph_to_sbn(g: DrsGraph, order: Optional[Sequence[int]] = None) -> SequentialGraph:
    """Render a graph as a sequential graph under ``order``.

    ``order`` must list every predicate and entity node id exactly once
    (default: :func:`default_item_order`). Boxes, membership edges and
    discourse edges have no sequential rendering and are dropped. Satellite
    order within an item follows the graph's edge order.
    """
    if order is None:
        order = default_item_order(g)
    order = list(order)
    expected = {n.id for n in g.nodes if n.kind in (PREDICATE, ENTITY)}
    if len(order) != len(set(order)):
        raise OrderError("item order contains repeats")
    if set(order) != expected:
        missing = sorted(expected - set(order))
        extra = sorted(set(order) - expected)
        raise OrderError(
            f"item order must cover the predicate/entity nodes exactly "
            f"(missing {missing}, extra {extra})"
        )
    position = {nid: i for i, nid in enumerate(order)}

    sats: dict[int, list[Satellite]] = {nid: [] for nid in order}
    for e in g.edges:
        if e.kind != ROLE_EDGE:
            continue
        offset = position[e.dst] - position[e.src]
        sats[e.src].append(Satellite(e.label, offset))

    items = []
    for nid in order:
        node = g.node(nid)
        if node.kind == PREDICATE and looks_like_synset(node.label):
            head = synset_parse(node.label)
        else:
            head = node.label
        items.append(SbnItem(head, tuple(sats[nid])))
    return SequentialGraph(tuple(items))


def sbn_to_graph(s: SequentialGraph) -> DrsGraph:
    """Build the graph of a well-formed sequential graph.

    Synset-headed items become predicate nodes attached to a single default
    box; constant-headed items become entity nodes; satellites become
    semantic-role edges. Raises NotWellFormedError when validation fails.
    """
    report = validate_sbn(s)
    if not report.well_formed:
        raise NotWellFormedError(report, "sequential graph")

    builder = GraphBuilder()
    box_id: Optional[int] = None
    item_nodes: list[int] = []
    for item in s.items:
        if isinstance(item.head, SynsetId):
            if box_id is None:
                box_id = builder.add_box()
            node = builder.add_predicate(item.head)
            builder.add_membership(node, box_id)
        else:
            node = builder.add_entity(item.head)
        item_nodes.append(node)

    for i, item in enumerate(s.items):
        for sat in item.satellites:
            builder.add_role(item_nodes[i], item_nodes[i + sat.offset], sat.role)
    return builder.build()


def item_order_of(g: DrsGraph) -> list[int]:
    """Node ids of a graph's predicate/entity nodes in creation order.

    For graphs built by :func:`sbn_to_graph` this is exactly the original
    item order, making the round trip through graph_to_sbn exact.
    """
    return [n.id for n in g.nodes if n.kind in (PREDICATE, ENTITY)]
