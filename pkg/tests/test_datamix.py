"""Manifest loading, language-blind pooling, seeded batching, regimes."""
import math

import pytest

from drskit.core import SymbolSequence
from drskit.datamix import (
    Batch,
    CorpusManifest,
    DataSelector,
    EmptyPoolError,
    ManifestError,
    ManifestRecord,
    MissingSplitError,
    TrainingInstance,
    UnknownLanguageError,
    batches,
    cross_lingual_batches,
    finetune_stage,
    load_manifest,
    regime_schedule,
    schedule_batches,
    training_pool,
)
from drskit.rand import derive_seed

WELL = 'b1 REF x1\nb1 male "n.02" x1\n'


# ---------------------------------------------------------------------------
# fixtures

def write_corpus(root, lang, split, n, target_text=WELL):
    """Write n records under <root>/<lang>/<split>.idx plus data files."""
    d = root / lang
    d.mkdir(exist_ok=True)
    rows = []
    for i in range(n):
        rec = f"{lang}-{split}-{i}"
        (d / f"{rec}.txt").write_text(f"{lang} sentence {i}\n", encoding="utf-8")
        (d / f"{rec}.clf").write_text(target_text, encoding="utf-8")
        rows.append(f"{rec}\t{rec}.txt\t{rec}.clf")
    (d / f"{split}.idx").write_text("\n".join(rows) + "\n", encoding="utf-8")


def mem_manifest(spec):
    """In-memory manifest from {(language, split): count}."""
    records = {}
    for (lang, split), n in spec.items():
        records[(lang, split)] = tuple(
            ManifestRecord(f"{lang}-{split}-{i}", f"{lang} sentence {i}",
                           SymbolSequence((lang, split, str(i))))
            for i in range(n))
    langs = tuple(sorted({lang for lang, _ in spec}))
    return CorpusManifest(langs, records)


# ---------------------------------------------------------------------------
# loading

def test_load_manifest_layout(tmp_path):
    write_corpus(tmp_path, "en", "train", 3)
    write_corpus(tmp_path, "en", "dev", 1)
    write_corpus(tmp_path, "it", "silver", 2)
    m = load_manifest(tmp_path)
    assert m.languages == ("en", "it")
    assert [r.doc_id for r in m.split("en", "train")] == [
        "en-train-0", "en-train-1", "en-train-2"]
    assert m.counts()[("it", "silver")] == 2
    assert m.counts()[("it", "train")] == 0
    assert m.has_gold_train("en") and not m.has_gold_train("it")
    rec = m.split("en", "train")[0]
    assert rec.source == "en sentence 0"
    assert rec.target.tokens[0] == "b1"


def test_load_manifest_skips_comments_and_nonlanguage_dirs(tmp_path):
    write_corpus(tmp_path, "en", "train", 1)
    idx = tmp_path / "en" / "train.idx"
    idx.write_text("# comment\n\n" + idx.read_text(encoding="utf-8"),
                   encoding="utf-8")
    (tmp_path / "README").write_text("not an index\n", encoding="utf-8")
    (tmp_path / "scripts").mkdir()   # directory without any .idx
    m = load_manifest(tmp_path)
    assert m.languages == ("en",)
    assert len(m.split("en", "train")) == 1


def test_load_manifest_missing_root(tmp_path):
    with pytest.raises(ManifestError, match="not a directory"):
        load_manifest(tmp_path / "nowhere")


def test_load_manifest_bad_row(tmp_path):
    write_corpus(tmp_path, "en", "train", 1)
    (tmp_path / "en" / "train.idx").write_text("just-an-id\n", encoding="utf-8")
    with pytest.raises(ManifestError, match="expected id<TAB>"):
        load_manifest(tmp_path)


def test_load_manifest_duplicate_id(tmp_path):
    write_corpus(tmp_path, "en", "train", 1)
    idx = tmp_path / "en" / "train.idx"
    idx.write_text(idx.read_text(encoding="utf-8") * 2, encoding="utf-8")
    with pytest.raises(ManifestError, match="duplicate id"):
        load_manifest(tmp_path)


def test_load_manifest_missing_data_file(tmp_path):
    write_corpus(tmp_path, "en", "train", 1)
    (tmp_path / "en" / "en-train-0.txt").unlink()
    with pytest.raises(ManifestError, match="train.idx:1"):
        load_manifest(tmp_path)


def test_load_manifest_empty_source(tmp_path):
    write_corpus(tmp_path, "en", "train", 1)
    (tmp_path / "en" / "en-train-0.txt").write_text(" \n", encoding="utf-8")
    with pytest.raises(ManifestError, match="empty source"):
        load_manifest(tmp_path)


def test_load_manifest_unparseable_target(tmp_path):
    write_corpus(tmp_path, "en", "train", 1, target_text="b1 REF\n")
    with pytest.raises(ManifestError, match="does not parse"):
        load_manifest(tmp_path)


def test_manifest_split_checks_names():
    m = mem_manifest({("en", "train"): 1})
    with pytest.raises(UnknownLanguageError):
        m.split("fr", "train")
    with pytest.raises(ValueError, match="unknown split"):
        m.split("en", "validation")


# ---------------------------------------------------------------------------
# selectors and pools

def test_selector_refuses_evaluation_splits():
    with pytest.raises(ValueError, match="not usable for training"):
        DataSelector(splits=("dev",))
    with pytest.raises(ValueError, match="not usable for training"):
        DataSelector(splits=("train", "test"))
    with pytest.raises(ValueError, match="at least one split"):
        DataSelector(splits=())
    with pytest.raises(ValueError, match="empty language list"):
        DataSelector(languages=())


def test_training_instance_rejects_empty_sides():
    with pytest.raises(ValueError):
        TrainingInstance((), ("a",))
    with pytest.raises(ValueError):
        TrainingInstance(("a",), ())


def test_training_pool_order_and_blindness():
    m = mem_manifest({("en", "train"): 2, ("en", "silver"): 1,
                      ("it", "silver"): 2, ("it", "dev"): 3})
    pool = training_pool(m)
    # selector language order x (train, silver) x record order; dev ignored
    assert [p.output for p in pool] == [
        ("en", "train", "0"), ("en", "train", "1"), ("en", "silver", "0"),
        ("it", "silver", "0"), ("it", "silver", "1")]
    assert all(not hasattr(p, "language") for p in pool)
    only_it = training_pool(m, DataSelector(languages=("it",)))
    assert len(only_it) == 2
    with pytest.raises(UnknownLanguageError):
        training_pool(m, DataSelector(languages=("fr",)))


# ---------------------------------------------------------------------------
# batches

def pool_of(n):
    return tuple(TrainingInstance((f"in{i}",), (f"out{i}",)) for i in range(n))


def test_batches_partition_each_epoch():
    """One epoch is a permutation of the pool cut into chunks."""
    pool = pool_of(10)
    out = list(batches(pool, batch_size=4, seed=7, epochs=3))
    assert len(out) == 3 * math.ceil(10 / 4)
    for epoch in range(3):
        chunk = [b for b in out if b.epoch == epoch]
        assert [b.index for b in chunk] == [0, 1, 2]
        assert [len(b.instances) for b in chunk] == [4, 4, 2]
        seen = [i for b in chunk for i in b.instances]
        assert sorted(seen, key=lambda i: i.input) == list(pool)


def test_batches_deterministic_and_seed_sensitive():
    pool = pool_of(50)
    a = list(batches(pool, 8, seed=1, epochs=2))
    b = list(batches(pool, 8, seed=1, epochs=2))
    c = list(batches(pool, 8, seed=2, epochs=2))
    assert a == b
    assert a != c
    # epochs reshuffle: same content, different order
    first = [i for x in a if x.epoch == 0 for i in x.instances]
    second = [i for x in a if x.epoch == 1 for i in x.instances]
    assert first != second and sorted(first, key=id) is not None


def test_batches_with_replacement():
    pool = pool_of(10)
    out = list(batches(pool, 4, seed=3, with_replacement=True))
    assert [len(b.instances) for b in out] == [4, 4, 4]
    assert all(i in pool for b in out for i in b.instances)


def test_batches_argument_errors():
    pool = pool_of(3)
    with pytest.raises(ValueError, match="batch_size"):
        list(batches(pool, 0, seed=0))
    with pytest.raises(ValueError, match="epochs"):
        list(batches(pool, 1, seed=0, epochs=-1))
    with pytest.raises(EmptyPoolError):
        list(batches((), 1, seed=0))


def test_cross_lingual_batches_pool_everything():
    m = mem_manifest({("en", "train"): 4, ("it", "silver"): 4,
                      ("nl", "silver"): 4, ("nl", "test"): 9})
    out = list(cross_lingual_batches(m, batch_size=5, seed=0))
    got = {i for b in out for i in b.instances}
    assert len(got) == 12
    assert not any(i.output[1] == "test" for i in got)


# ---------------------------------------------------------------------------
# regimes

def test_regime_base_prefers_gold_train():
    m = mem_manifest({("en", "train"): 2, ("en", "silver"): 2})
    (stage,) = regime_schedule("base", m, "en").stages
    assert stage.selector.splits == ("train",)
    assert stage.epochs == 100


def test_regime_base_falls_back_to_silver():
    m = mem_manifest({("it", "silver"): 2})
    (stage,) = regime_schedule("base", m, "it").stages
    assert stage.selector.splits == ("silver",)
    m2 = mem_manifest({("it", "dev"): 2})
    with pytest.raises(MissingSplitError, match="neither train nor silver"):
        regime_schedule("base", m2, "it")


def test_regime_base_plus_requires_gold_train():
    m = mem_manifest({("en", "train"): 2, ("en", "silver"): 2})
    sched = regime_schedule("base+", m, "en")
    assert [s.selector.splits for s in sched.stages] == [
        ("train", "silver"), ("train",)]
    assert "starts from" in sched.stages[1].note
    silver_only = mem_manifest({("it", "silver"): 2})
    with pytest.raises(MissingSplitError, match="base\\+"):
        regime_schedule("base+", silver_only, "it")


def test_regime_cross_lingual_is_language_blind():
    m = mem_manifest({("en", "train"): 2, ("it", "silver"): 2})
    (stage,) = regime_schedule("cross-lingual", m).stages
    assert stage.name == "mixed"
    assert stage.selector.languages is None
    assert stage.epochs == 20


def test_regime_cross_lingual_plus_chains_finetune():
    m = mem_manifest({("en", "train"): 2, ("it", "silver"): 2})
    sched = regime_schedule("cross-lingual+", m, "it")
    assert [s.name for s in sched.stages] == ["mixed", "finetune-it"]
    assert [s.epochs for s in sched.stages] == [20, 100]
    assert sched.stages[1].selector.splits == ("silver",)
    assert "starts from mixed-last-epoch" in sched.stages[1].note


def test_regime_argument_errors():
    m = mem_manifest({("en", "train"): 1})
    with pytest.raises(ValueError, match="unknown regime"):
        regime_schedule("zero-shot", m, "en")
    with pytest.raises(ValueError, match="needs a language"):
        regime_schedule("base", m)
    with pytest.raises(UnknownLanguageError):
        regime_schedule("base+", m, "fr")


def test_finetune_stage_names_checkpoint():
    m = mem_manifest({("nl", "silver"): 3})
    (stage,) = finetune_stage(m, "nl", base_checkpoint_tag="ckpt-7").stages
    assert stage.name == "finetune-nl"
    assert "ckpt-7" in stage.note and "nl silver" in stage.note


def test_schedule_batches_uses_per_stage_seeds():
    m = mem_manifest({("en", "train"): 6, ("it", "silver"): 6})
    sched = regime_schedule("cross-lingual+", m, "it")
    run = list(schedule_batches(m, sched, seed=9, epochs_override=1))
    names = [name for name, _ in run]
    assert names[0] == "mixed" and names[-1] == "finetune-it"
    # each stage independently reproducible from its derived seed
    tail = [b for name, b in run if name == "finetune-it"]
    pool = training_pool(m, sched.stages[1].selector)
    direct = list(batches(pool, sched.stages[1].batch_size,
                          derive_seed(9, 1), epochs=1))
    assert tail == direct
