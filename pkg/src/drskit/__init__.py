"""drskit: clause/graph/sequence forms of discourse representations,
well-formedness validation, conversion between the forms, matching-based
evaluation metrics, multilingual batch mixing, and low-rank adapter numerics.
"""
from .core import (
    BOX,
    CONCEPT,
    CONSTANT,
    DRS_OPERATOR,
    ENTITY,
    ERROR_CLASSES,
    SEMANTIC_ROLE,
    Clause,
    ClauseSet,
    DrsGraph,
    GraphBuilder,
    IllFormedError,
    MalformedSynsetError,
    Satellite,
    SbnItem,
    SequentialGraph,
    SymbolSequence,
    SynsetId,
    Term,
    constant,
    relation_category,
    synset_parse,
    synset_render,
    variable,
)
from .registry import ArityRegistry, RegistryError, RelationSignature, default_registry

__version__ = "0.1.0"
