"""Core domain types: clause form, graph form, sequential (SBN-style) form.

Three representations of the same meaning:

* clause form -- a set of box-prefixed clauses over variables and constants;
* graph form -- a variable-free directed graph of predicate / entity /
  box-dummy nodes;
* sequential form -- an ordered list of items whose arguments point at other
  items through signed relative offsets.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional, Union

# --------------------------------------------------------------------------
# error taxonomy (shared by the validator and the ingestion paths)

ILLEGAL_CLAUSE_STRUCTURE = "illegal-clause-structure"
FREE_VARIABLE = "free-variable"
OFFSET_OUT_OF_RANGE = "offset-out-of-range"
DUPLICATE_ROLE = "duplicate-role"
UNKNOWN_RELATION = "unknown-relation"

ERROR_CLASSES = (
    ILLEGAL_CLAUSE_STRUCTURE,
    FREE_VARIABLE,
    OFFSET_OUT_OF_RANGE,
    DUPLICATE_ROLE,
    UNKNOWN_RELATION,
)


class IllFormedError(Exception):
    """A model output that does not decode to a well-formed structure.

    Instances are values as much as exceptions: the scoring layer accepts
    them in place of a structure and scores the document as ill-formed.
    """

    def __init__(self, error_class: str, location: int, detail: str):
        if error_class not in ERROR_CLASSES:
            raise ValueError(f"unknown error class: {error_class!r}")
        super().__init__(f"{error_class} at {location}: {detail}")
        self.error_class = error_class
        self.location = location
        self.detail = detail


# --------------------------------------------------------------------------
# terms and variables

VARIABLE_RE = re.compile(r"^([a-z])(\d+)$")
BOX_LETTER = "b"

BOX = "box"
ENTITY = "entity"
CONSTANT = "constant"


def classify_token(token: str) -> str:
    """Kind of a bare (unquoted) argument token: box / entity / constant."""
    m = VARIABLE_RE.match(token)
    if not m:
        return CONSTANT
    return BOX if m.group(1) == BOX_LETTER else ENTITY


def is_box_variable(token: str) -> bool:
    return classify_token(token) == BOX


@dataclass(frozen=True)
class Term:
    """One clause argument: a box variable, an entity variable or a constant.

    Constant labels are stored without the surrounding quotes; rendering
    adds them back, so serialized files always carry quoted constants.
    """

    kind: str
    label: str

    def __post_init__(self):
        if self.kind not in (BOX, ENTITY, CONSTANT):
            raise ValueError(f"bad term kind: {self.kind!r}")
        if not self.label:
            raise ValueError("term label must be non-empty")
        if self.kind in (BOX, ENTITY) and classify_token(self.label) != self.kind:
            raise ValueError(f"label {self.label!r} is not a {self.kind} variable")

    @property
    def is_variable(self) -> bool:
        return self.kind != CONSTANT

    def render(self) -> str:
        return f'"{self.label}"' if self.kind == CONSTANT else self.label


def variable(label: str) -> Term:
    return Term(classify_token(label), label)


def constant(label: str) -> Term:
    return Term(CONSTANT, label)


# --------------------------------------------------------------------------
# synset identifiers

SYNSET_POS = ("n", "v", "a", "r")
_SYNSET_RE = re.compile(r"^(?P<lemma>\S+)\.(?P<pos>[nvar])\.(?P<sense>\d{2})$")
SENSE_RE = re.compile(r"^(?P<pos>[nvar])\.(?P<sense>\d{2})$")


class MalformedSynsetError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class SynsetId:
    """A word sense: lemma, part of speech (n/v/a/r) and two-digit sense."""

    lemma: str
    pos: str
    sense: str

    def __post_init__(self):
        if not self.lemma or any(c.isspace() for c in self.lemma):
            raise MalformedSynsetError(f"bad lemma: {self.lemma!r}")
        if self.pos not in SYNSET_POS:
            raise MalformedSynsetError(f"pos must be one of n/v/a/r, got {self.pos!r}")
        if not re.fullmatch(r"\d{2}", self.sense):
            raise MalformedSynsetError(f"sense must be two digits, got {self.sense!r}")

    def render(self) -> str:
        return f"{self.lemma}.{self.pos}.{self.sense}"

    def __str__(self) -> str:
        return self.render()


def synset_parse(text: str) -> SynsetId:
    """Parse ``lemma.pos.sense`` (e.g. ``climb_up.v.01``).

    Raises MalformedSynsetError on a missing field, a POS letter outside
    n/v/a/r, or a non-two-digit sense.
    """
    m = _SYNSET_RE.match(text)
    if not m:
        # produce a pointed message for the common failure shapes
        parts = text.rsplit(".", 2)
        if len(parts) != 3 or not parts[0]:
            raise MalformedSynsetError(f"not a lemma.pos.sense token: {text!r}")
        _, pos, sense = parts
        if pos not in SYNSET_POS:
            raise MalformedSynsetError(f"pos must be one of n/v/a/r, got {pos!r}")
        raise MalformedSynsetError(f"sense must be two digits, got {sense!r}")
    return SynsetId(m.group("lemma"), m.group("pos"), m.group("sense"))


def synset_render(s: SynsetId) -> str:
    return s.render()


def looks_like_synset(token: str) -> bool:
    return _SYNSET_RE.match(token) is not None


# --------------------------------------------------------------------------
# relation categories

DRS_OPERATOR = "drs-operator"
SEMANTIC_ROLE = "semantic-role"
CONCEPT = "concept"


def relation_category(relation: str) -> str:
    """Category of a relation name, total over non-empty strings.

    All letters uppercase -> DRS operator (REF, NOT, CONTRAST, SY1 ...);
    initial uppercase -> semantic role (Agent, Co-Theme ...);
    anything else -> concept lemma (male, climb_up ...).
    """
    if not relation:
        raise ValueError("empty relation name")
    letters = [c for c in relation if c.isalpha()]
    if letters and all(c.isupper() for c in letters):
        return DRS_OPERATOR
    if relation[0].isupper():
        return SEMANTIC_ROLE
    return CONCEPT


# --------------------------------------------------------------------------
# clauses

@dataclass(frozen=True)
class Clause:
    """A single box-prefixed clause: ``box relation arg1 [arg2 [arg3]]``."""

    box: str
    relation: str
    args: tuple[Term, ...]

    def __post_init__(self):
        if classify_token(self.box) != BOX:
            raise ValueError(f"clause box must be a box variable, got {self.box!r}")
        if not self.relation:
            raise ValueError("clause relation must be non-empty")
        if not 1 <= len(self.args) <= 3:
            raise ValueError(f"clause takes 1-3 args, got {len(self.args)}")

    @property
    def category(self) -> str:
        return relation_category(self.relation)

    def sense_constant(self) -> Optional[str]:
        """The ``pos.sense`` constant of a concept clause, if it carries one."""
        if self.category != CONCEPT:
            return None
        for t in self.args:
            if t.kind == CONSTANT and SENSE_RE.match(t.label):
                return t.label
        return None

    def synset(self) -> Optional[SynsetId]:
        """SynsetId for a sense-bearing concept clause, else None."""
        sense = self.sense_constant()
        if sense is None:
            return None
        m = SENSE_RE.match(sense)
        try:
            return SynsetId(self.relation, m.group("pos"), m.group("sense"))
        except MalformedSynsetError:
            return None

    def variables(self) -> Iterator[tuple[str, str]]:
        """Yield (label, kind) for the box variable and every variable arg."""
        yield self.box, BOX
        for t in self.args:
            if t.is_variable:
                yield t.label, t.kind

    def render(self) -> str:
        return " ".join([self.box, self.relation] + [t.render() for t in self.args])


@dataclass(frozen=True)
class VariableOccurrences:
    """Where one variable occurs inside a clause set."""

    kind: str
    box_positions: tuple[int, ...]              # clause indices where it is the box
    arg_positions: tuple[tuple[int, int], ...]  # (clause index, arg index)


@dataclass(frozen=True, eq=False)
class ClauseSet:
    """A deduplicated, document-ordered collection of clauses.

    Equality and scoring are set-based; the stored order only matters for
    serialization. ``duplicates_dropped`` counts clauses removed on build.
    """

    clauses: tuple[Clause, ...]
    duplicates_dropped: int = 0

    @classmethod
    def from_clauses(cls, clauses: Iterable[Clause]) -> "ClauseSet":
        seen = set()
        kept = []
        dropped = 0
        for c in clauses:
            if c in seen:
                dropped += 1
            else:
                seen.add(c)
                kept.append(c)
        return cls(tuple(kept), dropped)

    @cached_property
    def as_set(self) -> frozenset:
        return frozenset(self.clauses)

    @cached_property
    def variable_index(self) -> dict[str, VariableOccurrences]:
        """Index of every variable with its box-position and arg-position uses."""
        boxes: dict[str, list] = {}
        args: dict[str, list] = {}
        kinds: dict[str, str] = {}
        for i, c in enumerate(self.clauses):
            kinds.setdefault(c.box, BOX)
            boxes.setdefault(c.box, []).append(i)
            for j, t in enumerate(c.args):
                if t.is_variable:
                    kinds.setdefault(t.label, t.kind)
                    args.setdefault(t.label, []).append((i, j))
        return {
            v: VariableOccurrences(
                kinds[v],
                tuple(boxes.get(v, ())),
                tuple(args.get(v, ())),
            )
            for v in kinds
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, ClauseSet):
            return NotImplemented
        return self.as_set == other.as_set

    def __hash__(self) -> int:
        return hash(self.as_set)

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)


# --------------------------------------------------------------------------
# variable-free graph form

PREDICATE = "predicate"
BOX_NODE = "box"
# entity nodes reuse the ENTITY constant

ROLE_EDGE = "role"
DISCOURSE_EDGE = "discourse"
MEMBER_EDGE = "member"


@dataclass(frozen=True)
class Node:
    id: int
    kind: str      # predicate | entity | box
    label: str     # synset text / constant text / "" for boxes


@dataclass(frozen=True)
class Edge:
    kind: str      # role | discourse | member
    src: int
    dst: int
    label: str     # role or relation name; "" for membership


class GraphInvariantError(ValueError):
    pass


@dataclass(frozen=True)
class DrsGraph:
    """Variable-free DRS graph. Construct through :class:`GraphBuilder`.

    Node ids equal node positions; edge endpoints obey the typing rules
    (roles between predicate/entity nodes, discourse relations between
    boxes, membership from predicate to box).
    """

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]

    def node(self, node_id: int) -> Node:
        return self.nodes[node_id]

    def nodes_of_kind(self, kind: str) -> list[Node]:
        return [n for n in self.nodes if n.kind == kind]

    def edges_of_kind(self, kind: str) -> list[Edge]:
        return [e for e in self.edges if e.kind == kind]

    def __post_init__(self):
        for i, n in enumerate(self.nodes):
            if n.id != i:
                raise GraphInvariantError("node ids must equal node positions")


class GraphBuilder:
    """Incremental DrsGraph construction enforcing the edge-typing invariants."""

    def __init__(self):
        self._nodes: list[Node] = []
        self._edges: list[Edge] = []
        self._roles_seen: set[tuple[int, str]] = set()
        self._membership_of: dict[int, int] = {}

    def _add_node(self, kind: str, label: str) -> int:
        node = Node(len(self._nodes), kind, label)
        self._nodes.append(node)
        return node.id

    def add_predicate(self, label: Union[SynsetId, str]) -> int:
        text = label.render() if isinstance(label, SynsetId) else str(label)
        if not text:
            raise GraphInvariantError("predicate label must be non-empty")
        return self._add_node(PREDICATE, text)

    def add_entity(self, label: str) -> int:
        if not label:
            raise GraphInvariantError("entity label must be non-empty")
        return self._add_node(ENTITY, label)

    def add_box(self) -> int:
        return self._add_node(BOX_NODE, "")

    def _check(self, node_id: int, kinds: tuple[str, ...], what: str) -> None:
        if not 0 <= node_id < len(self._nodes):
            raise GraphInvariantError(f"{what}: no node {node_id}")
        if self._nodes[node_id].kind not in kinds:
            raise GraphInvariantError(
                f"{what}: node {node_id} is a {self._nodes[node_id].kind}, "
                f"expected {' or '.join(kinds)}"
            )

    def add_role(self, src: int, dst: int, role: str) -> None:
        self._check(src, (PREDICATE, ENTITY), "role source")
        self._check(dst, (PREDICATE, ENTITY), "role target")
        if src == dst:
            raise GraphInvariantError("role edge may not be a self-loop")
        if (src, role) in self._roles_seen:
            raise GraphInvariantError(f"duplicate role {role!r} out of node {src}")
        self._roles_seen.add((src, role))
        self._edges.append(Edge(ROLE_EDGE, src, dst, role))

    def add_discourse(self, src: int, dst: int, relation: str) -> None:
        self._check(src, (BOX_NODE,), "discourse source")
        self._check(dst, (BOX_NODE,), "discourse target")
        self._edges.append(Edge(DISCOURSE_EDGE, src, dst, relation))

    def add_membership(self, pred: int, box: int) -> None:
        self._check(pred, (PREDICATE,), "membership predicate")
        self._check(box, (BOX_NODE,), "membership box")
        if pred in self._membership_of:
            raise GraphInvariantError(f"predicate {pred} already has a membership edge")
        self._membership_of[pred] = box
        self._edges.append(Edge(MEMBER_EDGE, pred, box, ""))

    def build(self) -> DrsGraph:
        for n in self._nodes:
            if n.kind == PREDICATE and n.id not in self._membership_of:
                raise GraphInvariantError(
                    f"predicate node {n.id} ({n.label}) has no membership edge"
                )
        return DrsGraph(tuple(self._nodes), tuple(self._edges))


# --------------------------------------------------------------------------
# sequential (SBN-style) form

@dataclass(frozen=True)
class Satellite:
    """One (role, signed offset) argument of a sequential item."""

    role: str
    offset: int

    def __post_init__(self):
        if not self.role:
            raise ValueError("satellite role must be non-empty")
        if self.offset == 0:
            raise ValueError("satellite offset must be non-zero")


@dataclass(frozen=True)
class SbnItem:
    head: Union[SynsetId, str]  # a synset, or a constant string
    satellites: tuple[Satellite, ...] = ()

    def render_head(self) -> str:
        if isinstance(self.head, SynsetId):
            return self.head.render()
        return f'"{self.head}"'

    def render(self) -> str:
        parts = [self.render_head()]
        for s in self.satellites:
            parts.append(s.role)
            parts.append(f"{s.offset:+d}")
        return " ".join(parts)


@dataclass(frozen=True)
class SequentialGraph:
    """Ordered items whose satellites point at other items by relative offset."""

    items: tuple[SbnItem, ...]

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[SbnItem]:
        return iter(self.items)


# --------------------------------------------------------------------------
# flat symbol sequences (the model-facing encoding)

DEFAULT_SEPARATOR = "<sep>"


class SeparatorCollisionError(ValueError):
    """A payload token equals the separator token."""


@dataclass(frozen=True)
class SymbolSequence:
    """A flat token sequence with an explicit separator token.

    The separator never occurs inside a clause/item payload; linearizers
    enforce this at construction time.
    """

    tokens: tuple[str, ...]
    separator: str = DEFAULT_SEPARATOR

    def __post_init__(self):
        if not self.separator:
            raise ValueError("separator must be non-empty")

    def joined(self, joiner: str = " ") -> str:
        return joiner.join(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)
