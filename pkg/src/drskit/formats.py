"""Reading and writing the clause-file and SBN-file grammars.

Two ingestion paths with different failure behaviour:

* ``parse_*`` functions read trusted files (gold data). Problems raise
  parse errors carrying the offending line number.
* ``delinearize_*`` functions decode flat model output; any structural
  problem raises :class:`~drskit.core.IllFormedError`, which the scoring
  layer accepts as an ill-formed document rather than a crash.

Both grammars are documented in docs/formats.md. Serialization is
canonical: constants are always quoted and offsets always carry a sign.
"""
from __future__ import annotations

import re
from typing import Optional

from .core import (
    BOX,
    CONSTANT,
    DEFAULT_SEPARATOR,
    ILLEGAL_CLAUSE_STRUCTURE,
    Clause,
    ClauseSet,
    IllFormedError,
    Satellite,
    SbnItem,
    SeparatorCollisionError,
    SequentialGraph,
    SymbolSequence,
    Term,
    classify_token,
    looks_like_synset,
    synset_parse,
)
from .registry import ArityRegistry, default_registry

COMMENT_CHAR = "%"
OFFSET_RE = re.compile(r"^[+-]\d+$")


class ClauseParseError(ValueError):
    """Gold-path clause parsing failure."""

    def __init__(self, code: str, line_no: int, detail: str):
        super().__init__(f"{code} (line {line_no}): {detail}")
        self.code = code          # malformed-line | unknown-arity-relation | bad-variable-name
        self.line_no = line_no
        self.detail = detail


class SbnParseError(ValueError):
    """Gold-path SBN parsing failure."""

    def __init__(self, line_no: int, detail: str):
        super().__init__(f"malformed-item (line {line_no}): {detail}")
        self.code = "malformed-item"
        self.line_no = line_no
        self.detail = detail


def _strip_comment(tokens: list[str]) -> list[str]:
    """Drop everything from the first %-initial token onward."""
    for i, t in enumerate(tokens):
        if t.startswith(COMMENT_CHAR):
            return tokens[:i]
    return tokens


def _term_from_token(token: str) -> Term:
    """Decode one argument token. Raises ValueError on malformed quoting."""
    if token.startswith('"') or token.endswith('"'):
        if len(token) < 2 or not (token.startswith('"') and token.endswith('"')):
            raise ValueError(f"unbalanced quotes in {token!r}")
        inner = token[1:-1]
        if not inner:
            raise ValueError("empty constant")
        return Term(CONSTANT, inner)
    kind = classify_token(token)
    return Term(kind, token)


def _clause_from_tokens(
    tokens: list[str],
    registry: ArityRegistry,
    strict: bool,
    fail,
):
    """Shared clause decoding; ``fail(code, detail)`` raises the right error."""
    if len(tokens) < 3:
        fail("malformed-line", f"clause needs box, relation and 1-3 args, got {len(tokens)} tokens")
    if len(tokens) > 5:
        fail("malformed-line", f"clause takes at most 3 args, got {len(tokens) - 2} in {' '.join(tokens)}")
    box, relation = tokens[0], tokens[1]
    if classify_token(box) != BOX:
        fail("bad-variable-name", f"clause must start with a box variable, got {box!r}")
    sig = registry.lookup(relation)
    if sig is not None and sig.arity != len(tokens) - 2:
        fail(
            "malformed-line",
            f"{relation} takes {sig.arity} arg(s), got {len(tokens) - 2}",
        )
    if strict and not registry.known(relation):
        fail("unknown-arity-relation", f"relation {relation!r} is not registered")
    args = []
    for t in tokens[2:]:
        try:
            args.append(_term_from_token(t))
        except ValueError as exc:
            fail("malformed-line", str(exc))
    return Clause(box, relation, tuple(args))


# --------------------------------------------------------------------------
# clause files

def parse_clause_file(
    text: str,
    registry: Optional[ArityRegistry] = None,
    strict: bool = False,
) -> ClauseSet:
    """Parse one clause-form document.

    One clause per line; ``%`` starts a comment; blank lines are ignored.
    Strict mode additionally rejects relations missing from the registry.
    """
    registry = registry or default_registry()
    clauses = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = _strip_comment(raw.split())
        if not tokens:
            continue

        def fail(code: str, detail: str, _line=line_no):
            raise ClauseParseError(code, _line, detail)

        clauses.append(_clause_from_tokens(tokens, registry, strict, fail))
    return ClauseSet.from_clauses(clauses)


def serialize_clause_file(cs: ClauseSet) -> str:
    """One clause per line in document order; empty set -> empty string."""
    if not cs.clauses:
        return ""
    return "\n".join(c.render() for c in cs.clauses) + "\n"


def _clause_tokens(c: Clause) -> list[str]:
    return [c.box, c.relation] + [t.render() for t in c.args]


def linearize_clauses(cs: ClauseSet, separator: str = DEFAULT_SEPARATOR) -> SymbolSequence:
    """Flatten to a symbol sequence with ``separator`` between clauses."""
    tokens: list[str] = []
    for i, c in enumerate(cs.clauses):
        fields = _clause_tokens(c)
        if separator in fields:
            raise SeparatorCollisionError(
                f"clause {i} contains the separator token {separator!r}"
            )
        if i:
            tokens.append(separator)
        tokens.extend(fields)
    return SymbolSequence(tuple(tokens), separator)


def _split_on_separator(seq: SymbolSequence) -> list[list[str]]:
    chunks: list[list[str]] = []
    current: list[str] = []
    for t in seq.tokens:
        if t == seq.separator:
            if current:
                chunks.append(current)
            current = []
        else:
            current.append(t)
    if current:
        chunks.append(current)
    return chunks


def delinearize_clauses(
    seq: SymbolSequence,
    registry: Optional[ArityRegistry] = None,
) -> ClauseSet:
    """Decode model output back into a clause set.

    Raises IllFormedError (class ``illegal-clause-structure``) on any
    structural problem: wrong field count, arity mismatch for a registered
    relation, bad box token or malformed constant quoting. Unknown
    relations pass through for the validator to judge.
    """
    registry = registry or default_registry()
    clauses = []
    for idx, chunk in enumerate(_split_on_separator(seq)):

        def fail(code: str, detail: str, _idx=idx, _chunk=chunk):
            raise IllFormedError(
                ILLEGAL_CLAUSE_STRUCTURE,
                _idx,
                f"{detail} [tokens: {' '.join(_chunk)}]",
            )

        clauses.append(_clause_from_tokens(chunk, registry, False, fail))
    return ClauseSet.from_clauses(clauses)


# --------------------------------------------------------------------------
# SBN files

def _head_from_token(token: str):
    if looks_like_synset(token):
        return synset_parse(token)
    if token.startswith('"') or token.endswith('"'):
        if len(token) < 3 or not (token.startswith('"') and token.endswith('"')):
            raise ValueError(f"unbalanced quotes in head {token!r}")
        return token[1:-1]
    return token


def _item_from_tokens(tokens: list[str], fail) -> SbnItem:
    try:
        head = _head_from_token(tokens[0])
    except ValueError as exc:
        fail(str(exc))
    rest = tokens[1:]
    if len(rest) % 2:
        fail(f"dangling role token {rest[-1]!r} (role without offset)")
    sats = []
    for i in range(0, len(rest), 2):
        role, off = rest[i], rest[i + 1]
        if OFFSET_RE.match(role):
            fail(f"offset {role!r} where a role name was expected")
        if not OFFSET_RE.match(off):
            fail(f"satellite {role} has non-offset argument {off!r} "
                 "(offsets are signed integers like +1/-2)")
        value = int(off)
        if value == 0:
            fail(f"satellite {role} has zero offset")
        sats.append(Satellite(role, value))
    return SbnItem(head, tuple(sats))


def parse_sbn_file(text: str) -> SequentialGraph:
    """Parse one sequential-graph document.

    One item per line: a head token followed by alternating role-name and
    signed-offset tokens. ``%`` comments and blank lines are ignored.
    """
    items = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = _strip_comment(raw.split())
        if not tokens:
            continue

        def fail(detail: str, _line=line_no):
            raise SbnParseError(_line, detail)

        items.append(_item_from_tokens(tokens, fail))
    return SequentialGraph(tuple(items))


def serialize_sbn_file(g: SequentialGraph) -> str:
    if not g.items:
        return ""
    return "\n".join(item.render() for item in g.items) + "\n"


def _item_tokens(item: SbnItem) -> list[str]:
    tokens = [item.render_head()]
    for s in item.satellites:
        tokens.append(s.role)
        tokens.append(f"{s.offset:+d}")
    return tokens


def linearize_sbn(g: SequentialGraph, separator: str = DEFAULT_SEPARATOR) -> SymbolSequence:
    tokens: list[str] = []
    for i, item in enumerate(g.items):
        fields = _item_tokens(item)
        if separator in fields:
            raise SeparatorCollisionError(
                f"item {i} contains the separator token {separator!r}"
            )
        if i:
            tokens.append(separator)
        tokens.extend(fields)
    return SymbolSequence(tuple(tokens), separator)


def delinearize_sbn(seq: SymbolSequence) -> SequentialGraph:
    """Decode model output into a sequential graph.

    Structural failures raise IllFormedError with class
    ``illegal-clause-structure`` and the item index as location.
    """
    items = []
    for idx, chunk in enumerate(_split_on_separator(seq)):

        def fail(detail: str, _idx=idx, _chunk=chunk):
            raise IllFormedError(
                ILLEGAL_CLAUSE_STRUCTURE,
                _idx,
                f"{detail} [tokens: {' '.join(_chunk)}]",
            )

        items.append(_item_from_tokens(chunk, fail))
    return SequentialGraph(tuple(items))
