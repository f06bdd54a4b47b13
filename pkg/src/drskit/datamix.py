"""Corpus manifests and the cross-lingual training schedule.

A manifest indexes gold/silver data per language and split. Training pools
are language-blind: instances carry only input and output token sequences,
and batches are drawn by seeded per-epoch shuffling so a stream is exactly
reproducible from (manifest, selector, batch size, seed). Dev and test
splits can never enter a pool — the selector type refuses them.

On-disk layout: ``<root>/<language>/<split>.idx`` where each index line is
``id<TAB>source-path<TAB>target-path`` (paths relative to the index file,
``#``-comments and blank lines allowed). Source files hold raw text; target
files hold a clause file or a sequential-graph file.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping, Optional, Sequence

from .core import SymbolSequence
from .formats import (
    ClauseParseError,
    SbnParseError,
    linearize_clauses,
    linearize_sbn,
    parse_clause_file,
    parse_sbn_file,
)
from .rand import SplitMix64, derive_seed
from .registry import ArityRegistry

SPLITS = ("silver", "train", "dev", "test")
TRAINING_SPLITS = ("train", "silver")

CLAUSE_FORMAT = "clause"
SBN_FORMAT = "sbn"

DEFAULT_BATCH_SIZE = 8
MIXED_EPOCHS = 20
FINETUNE_EPOCHS = 100

REGIME_BASE = "base"
REGIME_BASE_PLUS = "base+"
REGIME_CROSS_LINGUAL = "cross-lingual"
REGIME_CROSS_LINGUAL_PLUS = "cross-lingual+"
REGIMES = (REGIME_BASE, REGIME_BASE_PLUS, REGIME_CROSS_LINGUAL,
           REGIME_CROSS_LINGUAL_PLUS)


class ManifestError(Exception):
    """A manifest is structurally broken: bad index line, duplicate id,
    unreadable or unparseable data file."""


class UnknownLanguageError(ManifestError):
    pass


class MissingSplitError(ManifestError):
    """A schedule needs a split the manifest does not provide."""


class EmptyPoolError(ManifestError):
    pass


@dataclass(frozen=True)
class ManifestRecord:
    doc_id: str
    source: str
    target: SymbolSequence


@dataclass(frozen=True)
class CorpusManifest:
    languages: tuple[str, ...]
    records: Mapping[tuple[str, str], tuple[ManifestRecord, ...]]

    def split(self, language: str, split: str) -> tuple[ManifestRecord, ...]:
        if language not in self.languages:
            raise UnknownLanguageError(f"language {language!r} not in manifest")
        if split not in SPLITS:
            raise ValueError(f"unknown split {split!r}")
        return self.records.get((language, split), ())

    def counts(self) -> dict[tuple[str, str], int]:
        return {
            (lang, split): len(self.split(lang, split))
            for lang in self.languages
            for split in SPLITS
        }

    def has_gold_train(self, language: str) -> bool:
        return bool(self.split(language, "train"))


def _parse_target(text: str, fmt: str,
                  registry: Optional[ArityRegistry]) -> SymbolSequence:
    if fmt == CLAUSE_FORMAT:
        return linearize_clauses(parse_clause_file(text, registry, strict=True))
    if fmt == SBN_FORMAT:
        return linearize_sbn(parse_sbn_file(text))
    raise ValueError(f"unknown format {fmt!r}")


def load_manifest(root, fmt: str = CLAUSE_FORMAT,
                  registry: Optional[ArityRegistry] = None) -> CorpusManifest:
    """Load every ``<root>/<language>/<split>.idx`` under a corpus root.

    Languages are the subdirectories holding at least one index file, in
    sorted order; record order follows the index files. Raises
    ManifestError on malformed index lines, duplicate ids within one
    (language, split), empty source text, or target files that do not
    parse under the requested grammar.
    """
    root = Path(root)
    if not root.is_dir():
        raise ManifestError(f"manifest root {str(root)!r} is not a directory")
    languages = []
    records: dict[tuple[str, str], tuple[ManifestRecord, ...]] = {}
    for lang_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        found = False
        for split in SPLITS:
            idx = lang_dir / f"{split}.idx"
            if not idx.is_file():
                continue
            found = True
            records[(lang_dir.name, split)] = _load_index(idx, fmt, registry)
        if found:
            languages.append(lang_dir.name)
    return CorpusManifest(tuple(languages), records)


def _load_index(idx: Path, fmt: str,
                registry: Optional[ArityRegistry]) -> tuple[ManifestRecord, ...]:
    out = []
    seen = set()
    base = idx.parent
    for line_no, raw in enumerate(idx.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ManifestError(
                f"{idx}:{line_no}: expected id<TAB>source<TAB>target, "
                f"got {len(parts)} fields")
        doc_id, source_rel, target_rel = parts
        if doc_id in seen:
            raise ManifestError(f"{idx}:{line_no}: duplicate id {doc_id!r}")
        seen.add(doc_id)
        source_path = base / source_rel
        target_path = base / target_rel
        try:
            source = source_path.read_text(encoding="utf-8").strip()
            target_text = target_path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ManifestError(f"{idx}:{line_no}: {exc}") from exc
        if not source:
            raise ManifestError(
                f"{idx}:{line_no}: empty source text in {source_rel!r}")
        try:
            target = _parse_target(target_text, fmt, registry)
        except (ClauseParseError, SbnParseError) as exc:
            raise ManifestError(
                f"{idx}:{line_no}: target {target_rel!r} does not parse: {exc}"
            ) from exc
        out.append(ManifestRecord(doc_id, source, target))
    return tuple(out)


# ---------------------------------------------------------------------------
# pools and batches

@dataclass(frozen=True)
class TrainingInstance:
    """One (input tokens, output symbols) couple. Deliberately carries no
    id and no language: pooled training data is language-blind."""

    input: tuple[str, ...]
    output: tuple[str, ...]

    def __post_init__(self):
        if not self.input:
            raise ValueError("empty input sequence")
        if not self.output:
            raise ValueError("empty output sequence")


@dataclass(frozen=True)
class DataSelector:
    """Which (languages x training splits) feed a pool. ``languages=None``
    means every manifest language. Dev/test are rejected outright, which
    makes training-batch leakage impossible by construction."""

    languages: Optional[tuple[str, ...]] = None
    splits: tuple[str, ...] = TRAINING_SPLITS

    def __post_init__(self):
        if not self.splits:
            raise ValueError("selector needs at least one split")
        for s in self.splits:
            if s not in TRAINING_SPLITS:
                raise ValueError(
                    f"split {s!r} is not usable for training "
                    f"(allowed: {', '.join(TRAINING_SPLITS)})")
        if self.languages is not None and not self.languages:
            raise ValueError("empty language list (use None for all)")


@dataclass(frozen=True)
class Batch:
    epoch: int
    index: int
    instances: tuple[TrainingInstance, ...]


def training_pool(manifest: CorpusManifest,
                  selector: DataSelector = DataSelector()) -> tuple[TrainingInstance, ...]:
    """Flatten the selected records into one pool, in manifest order,
    stripping ids and languages."""
    langs = selector.languages if selector.languages is not None else manifest.languages
    pool = []
    for lang in langs:
        if lang not in manifest.languages:
            raise UnknownLanguageError(f"language {lang!r} not in manifest")
        for split in selector.splits:
            for rec in manifest.split(lang, split):
                pool.append(TrainingInstance(
                    tuple(rec.source.split()), tuple(rec.target.tokens)))
    return tuple(pool)


def batches(pool: Sequence[TrainingInstance], batch_size: int, seed: int,
            epochs: int = 1, with_replacement: bool = False) -> Iterator[Batch]:
    """Seeded batch stream over a pool.

    Default mode reshuffles the whole pool each epoch (every instance
    appears exactly once per epoch; the final short batch is kept).
    ``with_replacement`` instead draws ceil(n/batch_size) full batches of
    uniform samples per epoch. Each epoch derives its own RNG stream, so
    equal (pool, batch_size, seed, epochs) give byte-equal streams.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    n = len(pool)
    if n == 0:
        raise EmptyPoolError("training pool is empty")
    for epoch in range(epochs):
        rng = SplitMix64(derive_seed(seed, epoch))
        if with_replacement:
            for b in range(math.ceil(n / batch_size)):
                chosen = tuple(pool[rng.randbelow(n)] for _ in range(batch_size))
                yield Batch(epoch, b, chosen)
        else:
            order = list(range(n))
            rng.shuffle(order)
            for b in range(math.ceil(n / batch_size)):
                chunk = order[b * batch_size:(b + 1) * batch_size]
                yield Batch(epoch, b, tuple(pool[i] for i in chunk))


def cross_lingual_batches(manifest: CorpusManifest,
                          selector: Optional[DataSelector] = None,
                          batch_size: int = DEFAULT_BATCH_SIZE,
                          seed: int = 0,
                          epochs: int = 1,
                          with_replacement: bool = False) -> Iterator[Batch]:
    """Batch stream over the pooled selection (default: every language's
    train + silver), without language identification."""
    pool = training_pool(manifest, selector or DataSelector())
    return batches(pool, batch_size, seed, epochs, with_replacement)


# ---------------------------------------------------------------------------
# stage schedules

@dataclass(frozen=True)
class Stage:
    name: str
    selector: DataSelector
    epochs: int
    batch_size: int = DEFAULT_BATCH_SIZE
    note: str = ""


@dataclass(frozen=True)
class StageSchedule:
    stages: tuple[Stage, ...]


def _language_training_selector(manifest: CorpusManifest, language: str) -> DataSelector:
    """Gold train when present, else silver; error when neither exists."""
    if language not in manifest.languages:
        raise UnknownLanguageError(f"language {language!r} not in manifest")
    if manifest.has_gold_train(language):
        return DataSelector((language,), ("train",))
    if manifest.split(language, "silver"):
        return DataSelector((language,), ("silver",))
    raise MissingSplitError(
        f"language {language!r} has neither train nor silver data")


def finetune_stage(manifest: CorpusManifest, language: str,
                   base_checkpoint_tag: str = "mixed-last-epoch") -> StageSchedule:
    """The language-specific fine-tuning step: gold train when the language
    has it, otherwise its silver data."""
    selector = _language_training_selector(manifest, language)
    used = selector.splits[0]
    return StageSchedule((Stage(
        name=f"finetune-{language}",
        selector=selector,
        epochs=FINETUNE_EPOCHS,
        note=f"starts from {base_checkpoint_tag}; data: {language} {used}",
    ),))


def _mixed_stage(manifest: CorpusManifest, batch_size: int) -> Stage:
    return Stage(
        name="mixed",
        selector=DataSelector(None, TRAINING_SPLITS),
        epochs=MIXED_EPOCHS,
        batch_size=batch_size,
        note=("language-blind pool over all languages' train+silver; "
              "checkpoint taken from the last epoch"),
    )


def regime_schedule(regime: str, manifest: CorpusManifest,
                    language: Optional[str] = None,
                    batch_size: int = DEFAULT_BATCH_SIZE) -> StageSchedule:
    """Stage schedule for one of the four training regimes.

    base            one stage on the language's train (silver fallback)
    base+           train+silver, then fine-tune on gold train (which must
                    exist — there is no principled fallback here)
    cross-lingual   one language-blind mixed stage, no language argument
    cross-lingual+  the mixed stage, then the fine-tune stage
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r} (one of {', '.join(REGIMES)})")
    if regime != REGIME_CROSS_LINGUAL and language is None:
        raise ValueError(f"regime {regime!r} needs a language")

    if regime == REGIME_BASE:
        selector = _language_training_selector(manifest, language)
        return StageSchedule((Stage(
            name=f"base-{language}",
            selector=selector,
            epochs=FINETUNE_EPOCHS,
            batch_size=batch_size,
            note=f"data: {language} {selector.splits[0]}",
        ),))

    if regime == REGIME_BASE_PLUS:
        if language not in manifest.languages:
            raise UnknownLanguageError(f"language {language!r} not in manifest")
        if not manifest.has_gold_train(language):
            raise MissingSplitError(
                f"regime 'base+' needs gold train data, which {language!r} lacks")
        first = Stage(
            name=f"base-plus-{language}-mixed",
            selector=DataSelector((language,), ("train", "silver")),
            epochs=FINETUNE_EPOCHS,
            batch_size=batch_size,
            note=f"data: {language} train+silver",
        )
        second = Stage(
            name=f"base-plus-{language}-finetune",
            selector=DataSelector((language,), ("train",)),
            epochs=FINETUNE_EPOCHS,
            batch_size=batch_size,
            note=f"starts from {first.name}; data: {language} train",
        )
        return StageSchedule((first, second))

    if regime == REGIME_CROSS_LINGUAL:
        return StageSchedule((_mixed_stage(manifest, batch_size),))

    # cross-lingual+
    mixed = _mixed_stage(manifest, batch_size)
    tail = finetune_stage(manifest, language)
    stages = (mixed,) + tuple(
        Stage(s.name, s.selector, s.epochs, batch_size, s.note)
        for s in tail.stages)
    return StageSchedule(stages)


def schedule_batches(manifest: CorpusManifest, schedule: StageSchedule,
                     seed: int = 0,
                     epochs_override: Optional[int] = None) -> Iterator[tuple[str, Batch]]:
    """Run a schedule: yields (stage name, batch) across all stages. Each
    stage draws from its own derived seed stream, so inserting or removing
    a stage does not disturb the others."""
    for stage_index, stage in enumerate(schedule.stages):
        pool = training_pool(manifest, stage.selector)
        n_epochs = stage.epochs if epochs_override is None else epochs_override
        for batch in batches(pool, stage.batch_size,
                             derive_seed(seed, stage_index), n_epochs):
            yield stage.name, batch
