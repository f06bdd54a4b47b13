"""Relation arity/argument-kind registry.

The table drives parse-time arity checks, validator signature checks and the
variable-binding rule. File format: one entry per line,

    relation<TAB>arity<TAB>argkinds

with ``#`` comment lines. ``argkinds`` is one letter per argument:

    b  box variable
    e  entity variable
    E  entity variable in binding position (introduces the variable)
    c  constant
    t  term: entity variable or constant

Concept clauses (lowercase lemma relations) are open-class and are not
listed; they carry the implicit signature (constant, entity variable).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional

from .core import BOX, CONCEPT, CONSTANT, ENTITY, relation_category

ARGKINDS = "beEct"

# implicit signature of concept clauses: sense/constant then the referent
CONCEPT_ARGKINDS = "ce"


class RegistryError(ValueError):
    pass


@dataclass(frozen=True)
class RelationSignature:
    arity: int
    argkinds: str

    def __post_init__(self):
        if self.arity != len(self.argkinds):
            raise RegistryError("arity does not match argkinds length")
        if not 1 <= self.arity <= 3:
            raise RegistryError("arity must be 1-3")
        for c in self.argkinds:
            if c not in ARGKINDS:
                raise RegistryError(f"unknown argkind letter {c!r}")

    def binding_positions(self) -> tuple[int, ...]:
        """Argument positions that introduce their variable."""
        return tuple(i for i, c in enumerate(self.argkinds) if c == "E")

    def kind_accepts(self, position: int, term_kind: str) -> bool:
        code = self.argkinds[position]
        if code == "b":
            return term_kind == BOX
        if code in ("e", "E"):
            return term_kind == ENTITY
        if code == "c":
            return term_kind == CONSTANT
        return term_kind in (ENTITY, CONSTANT)  # t


CONCEPT_SIGNATURE = RelationSignature(2, CONCEPT_ARGKINDS)


class ArityRegistry:
    """Lookup table from relation name to signature."""

    def __init__(self, table: dict[str, RelationSignature]):
        self._table = dict(table)

    @classmethod
    def from_text(cls, text: str) -> "ArityRegistry":
        table: dict[str, RelationSignature] = {}
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise RegistryError(f"line {line_no}: expected 3 tab-separated fields")
            relation, arity_text, argkinds = fields
            try:
                arity = int(arity_text)
            except ValueError:
                raise RegistryError(f"line {line_no}: arity must be an integer") from None
            if relation in table:
                raise RegistryError(f"line {line_no}: duplicate entry for {relation!r}")
            try:
                table[relation] = RelationSignature(arity, argkinds)
            except RegistryError as exc:
                raise RegistryError(f"line {line_no}: {exc}") from None
        return cls(table)

    @classmethod
    def from_path(cls, path) -> "ArityRegistry":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def lookup(self, relation: str) -> Optional[RelationSignature]:
        """Explicit table entry, or None."""
        return self._table.get(relation)

    def signature_for(self, relation: str) -> Optional[RelationSignature]:
        """Effective signature: explicit entry, else the implicit concept
        signature for lowercase lemma relations, else None (unknown)."""
        sig = self._table.get(relation)
        if sig is not None:
            return sig
        if relation_category(relation) == CONCEPT:
            return CONCEPT_SIGNATURE
        return None

    def known(self, relation: str) -> bool:
        return self.signature_for(relation) is not None

    def relations(self) -> tuple[str, ...]:
        return tuple(self._table)

    def __len__(self) -> int:
        return len(self._table)


@lru_cache(maxsize=1)
def default_registry() -> ArityRegistry:
    """The bundled registry covering the common clause-notation relations."""
    text = resources.files("drskit").joinpath("data/arities.tsv").read_text("utf-8")
    return ArityRegistry.from_text(text)
