"""Well-formedness checking and the ill-formedness (IF) rate.

Error classes mirror the failure modes seen in sequence-model output:
structural clause damage, unbound variables, offsets pointing outside the
item list, repeated roles on one item, and relations the registry does not
know. A document is ill-formed as soon as it has one error of any class.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .core import (
    BOX,
    CONCEPT,
    DUPLICATE_ROLE,
    ERROR_CLASSES,
    FREE_VARIABLE,
    ILLEGAL_CLAUSE_STRUCTURE,
    OFFSET_OUT_OF_RANGE,
    UNKNOWN_RELATION,
    ClauseSet,
    IllFormedError,
    SequentialGraph,
)
from .registry import ArityRegistry, default_registry

KIND_WORD = {"b": "a box variable", "e": "an entity variable",
             "E": "an entity variable", "c": "a constant",
             "t": "an entity variable or constant"}


@dataclass(frozen=True)
class ValidationError:
    error_class: str
    location: int       # clause or item index
    detail: str

    def __post_init__(self):
        if self.error_class not in ERROR_CLASSES:
            raise ValueError(f"unknown error class {self.error_class!r}")

    def to_dict(self) -> dict:
        return {
            "class": self.error_class,
            "location": self.location,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[ValidationError, ...]

    @property
    def well_formed(self) -> bool:
        return not self.errors

    @classmethod
    def clean(cls) -> "ValidationReport":
        return cls(())

    @classmethod
    def from_ill_formed(cls, exc: IllFormedError) -> "ValidationReport":
        return cls((ValidationError(exc.error_class, exc.location, exc.detail),))

    def classes(self) -> tuple[str, ...]:
        return tuple(e.error_class for e in self.errors)

    def to_dict(self) -> dict:
        return {
            "well_formed": self.well_formed,
            "errors": [e.to_dict() for e in self.errors],
        }


def validate_clauses(
    cs: ClauseSet,
    registry: Optional[ArityRegistry] = None,
) -> ValidationReport:
    """Check a parsed clause set for semantic well-formedness.

    Flags, per clause: unknown relations; arity or argument-kind violations
    against the registry (or against the implicit concept signature); and
    free variables. A variable counts as introduced if it occurs as the
    argument of a binding position (REF) or as the box field of any clause.
    """
    registry = registry or default_registry()
    errors: list[ValidationError] = []

    # collect introductions
    introduced: set[str] = set()
    for c in cs.clauses:
        introduced.add(c.box)
        sig = registry.signature_for(c.relation)
        if sig is None or sig.arity != len(c.args):
            continue
        for pos in sig.binding_positions():
            t = c.args[pos]
            if t.is_variable:
                introduced.add(t.label)

    for i, c in enumerate(cs.clauses):
        sig = registry.signature_for(c.relation)
        if sig is None:
            errors.append(ValidationError(
                UNKNOWN_RELATION, i,
                f"relation {c.relation!r} is not in the registry",
            ))
        elif sig.arity != len(c.args):
            errors.append(ValidationError(
                ILLEGAL_CLAUSE_STRUCTURE, i,
                f"{c.relation} takes {sig.arity} arg(s), got {len(c.args)}",
            ))
        else:
            for pos, t in enumerate(c.args):
                if not sig.kind_accepts(pos, t.kind):
                    errors.append(ValidationError(
                        ILLEGAL_CLAUSE_STRUCTURE, i,
                        f"{c.relation} arg {pos + 1} must be "
                        f"{KIND_WORD[sig.argkinds[pos]]}, got {t.render()}",
                    ))

        # free-variable check: one error per (clause, variable)
        binding = set(sig.binding_positions()) if sig and sig.arity == len(c.args) else set()
        flagged: set[str] = set()
        for pos, t in enumerate(c.args):
            if not t.is_variable or pos in binding or t.label in flagged:
                continue
            if t.label not in introduced:
                flagged.add(t.label)
                errors.append(ValidationError(
                    FREE_VARIABLE, i,
                    f"variable {t.label} is used but never introduced",
                ))
    return ValidationReport(tuple(errors))


def validate_sbn(g: SequentialGraph) -> ValidationReport:
    """Check satellite offsets and role uniqueness of a sequential graph."""
    errors: list[ValidationError] = []
    n = len(g.items)
    for i, item in enumerate(g.items):
        seen: set[str] = set()
        dup_flagged: set[str] = set()
        for s in item.satellites:
            target = i + s.offset
            if not 0 <= target < n:
                errors.append(ValidationError(
                    OFFSET_OUT_OF_RANGE, i,
                    f"satellite {s.role} {s.offset:+d} points at item {target}, "
                    f"outside 0..{n - 1}",
                ))
            if s.role in seen and s.role not in dup_flagged:
                dup_flagged.add(s.role)
                errors.append(ValidationError(
                    DUPLICATE_ROLE, i,
                    f"role {s.role} appears more than once on one item",
                ))
            seen.add(s.role)
    return ValidationReport(tuple(errors))


def if_rate(reports: Sequence[ValidationReport]) -> float:
    """Percentage of ill-formed documents, rounded to two decimals.

    Example: 1 ill-formed document out of 547 -> 0.18.
    """
    if not reports:
        raise ValueError("if_rate needs at least one report")
    bad = sum(1 for r in reports if not r.well_formed)
    return round(100.0 * bad / len(reports), 2)


def summarize(reports: Iterable[ValidationReport]) -> dict:
    """Corpus summary block: document counts, IF%, per-class error counts."""
    reports = list(reports)
    by_class: dict[str, int] = {}
    for r in reports:
        for e in r.errors:
            by_class[e.error_class] = by_class.get(e.error_class, 0) + 1
    return {
        "documents": len(reports),
        "ill_formed": sum(1 for r in reports if not r.well_formed),
        "if_percent": if_rate(reports) if reports else 0.0,
        "errors_by_class": dict(sorted(by_class.items())),
    }
