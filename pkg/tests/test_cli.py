"""End-to-end command-line behavior: exit codes, banners, config layering."""
import json
import subprocess
import sys
from pathlib import Path

import pytest

from drskit.cli import main
from drskit.formats import linearize_clauses, parse_clause_file

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
SCORE = FIXTURES / "score"
MANIFEST = str(FIXTURES / "manifest")


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("DRSKIT_SEED", raising=False)
    monkeypatch.delenv("DRSKIT_JOBS", raising=False)


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def golden(name):
    return (HERE / "golden" / name).read_text(encoding="utf-8")


# ---------------------------------------------------------------------------
# validate

def test_validate_reports_to_stdout_banner_to_stderr(capsys):
    rc, out, err = run(capsys, "validate", str(FIXTURES / "validate/clause.clf"))
    assert rc == 0
    assert out == golden("validation_clause.txt")
    assert err.startswith("# drskit validate ")
    assert "# drskit" not in out


def test_validate_strict_fails_on_findings(capsys):
    rc, _, _ = run(capsys, "validate", str(FIXTURES / "validate/clause.clf"),
                   "--strict")
    assert rc == 1
    rc, _, _ = run(capsys, "validate", str(SCORE / "gold"), "--strict")
    assert rc == 0


def test_validate_machine_report(capsys):
    rc, out, _ = run(capsys, "validate", str(FIXTURES / "validate/graph.sbn"),
                     "--mode", "sbn", "--report", "machine")
    assert rc == 0
    doc = json.loads(out)
    assert doc["schema_version"] == "1"
    assert doc["ill_formed"] == 2


def test_validate_missing_input_is_a_data_error(capsys):
    rc, _, err = run(capsys, "validate", str(FIXTURES / "nowhere"))
    assert rc == 1
    assert err.splitlines()[-1].startswith("error:")


# ---------------------------------------------------------------------------
# convert

def test_convert_clause_to_tokens_one_line_per_document(capsys):
    rc, out, _ = run(capsys, "convert", str(SCORE / "gold"), "--to", "tokens")
    assert rc == 0
    lines = out.splitlines()
    assert len(lines) == 6
    assert lines[0].split()[:3] == ["b1", "REF", "x1"]


def test_convert_clause_to_sbn(capsys):
    rc, out, _ = run(capsys, "convert", str(SCORE / "gold" / "d01.clf"),
                     "--to", "sbn")
    assert rc == 0
    heads = [line.split()[0] for line in out.splitlines() if line.strip()]
    assert sorted(heads) == ["climb_up.v.01", "male.n.02",
                             "telephone_pole.n.02", "time.n.08"]


def test_convert_clause_to_graph_json(capsys):
    rc, out, _ = run(capsys, "convert", str(SCORE / "gold" / "d01.clf"),
                     "--to", "graph-json")
    assert rc == 0
    docs = json.loads(out)
    assert len(docs) == 1
    labels = {n["label"] for n in docs[0]["nodes"] if n["kind"] == "predicate"}
    assert labels == {"male.n.02", "climb_up.v.01", "time.n.08",
                      "telephone_pole.n.02"}
    assert {e["kind"] for e in docs[0]["edges"]} == {"member", "role"}


def test_convert_sbn_to_clause_is_a_usage_error(capsys):
    rc, _, err = run(capsys, "convert", str(FIXTURES / "validate/graph.sbn"),
                     "--from", "sbn", "--to", "clause")
    assert rc == 2
    assert "usage error" in err


def test_convert_rejects_broken_input(capsys, tmp_path):
    bad = tmp_path / "bad.clf"
    bad.write_text("b1 REF\n", encoding="utf-8")
    rc, _, err = run(capsys, "convert", str(bad), "--to", "tokens")
    assert rc == 1
    assert "error: document" in err


# ---------------------------------------------------------------------------
# score

def score_args(*extra):
    return ["score", str(SCORE / "pred"), str(SCORE / "gold"), *extra]


def test_score_human_report_matches_golden(capsys):
    rc, out, err = run(capsys, *score_args(
        "--sources", str(SCORE / "src"), "--macro"))
    assert rc == 0
    assert out == golden("score_report.txt")
    assert err.startswith("# drskit score ")


def test_score_strict_flags_ill_formed(capsys):
    rc, _, _ = run(capsys, *score_args("--strict"))
    assert rc == 1


def test_score_machine_report_echoes_config(capsys):
    rc, out, _ = run(capsys, *score_args(
        "--report", "machine", "--seed", "3", "--restarts", "2"))
    assert rc == 0
    doc = json.loads(out)
    assert doc["kind"] == "score"
    assert doc["config"]["seed"] == 3
    assert doc["config"]["restarts"] == 2
    assert doc["documents"] == 6
    assert doc["if_percent"] == 16.67


def test_score_parallel_output_is_identical(capsys):
    rc1, out1, _ = run(capsys, *score_args("--jobs", "1"))
    rc2, out2, _ = run(capsys, *score_args("--jobs", "2"))
    assert rc1 == rc2 == 0
    assert out1 == out2


def test_score_token_encoded_predictions(capsys, tmp_path):
    pred_dir = tmp_path / "tok"
    pred_dir.mkdir()
    for f in sorted((SCORE / "gold").iterdir()):
        seq = linearize_clauses(parse_clause_file(f.read_text(encoding="utf-8")))
        (pred_dir / f.name).write_text(seq.joined() + "\n", encoding="utf-8")
    rc, out, _ = run(capsys, "score", str(pred_dir), str(SCORE / "gold"),
                     "--pred-encoding", "tokens")
    assert rc == 0
    assert "100.00" in out


def test_score_clause_mode_rejects_sbn_format(capsys):
    rc, _, err = run(capsys, *score_args("--format", "sbn"))
    assert rc == 2
    assert "usage error" in err


def test_score_graph_mode_on_clause_files(capsys):
    rc, out, _ = run(capsys, *score_args("--mode", "graph"))
    assert rc == 0
    assert "Smatch" in out


def test_config_precedence_flag_config_env(capsys, tmp_path, monkeypatch):
    """--seed beats the config file, which beats DRSKIT_SEED."""
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"seed": 99}', encoding="utf-8")
    monkeypatch.setenv("DRSKIT_SEED", "55")

    _, _, err = run(capsys, *score_args())
    assert " seed=55 " in err
    _, _, err = run(capsys, *score_args("--config", str(cfg)))
    assert " seed=99 " in err
    _, _, err = run(capsys, *score_args("--config", str(cfg), "--seed", "7"))
    assert " seed=7 " in err


def test_bad_env_value_is_a_usage_error(capsys, monkeypatch):
    monkeypatch.setenv("DRSKIT_SEED", "many")
    rc, _, err = run(capsys, *score_args())
    assert rc == 2
    assert "DRSKIT_SEED" in err


def test_bad_config_file_is_a_usage_error(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("[1, 2]", encoding="utf-8")
    rc, _, err = run(capsys, *score_args("--config", str(cfg)))
    assert rc == 2


def test_output_flag_writes_file(capsys, tmp_path):
    target = tmp_path / "report.txt"
    rc, out, _ = run(capsys, *score_args(
        "--sources", str(SCORE / "src"), "--macro", "--output", str(target)))
    assert rc == 0
    assert out == ""
    assert target.read_text(encoding="utf-8") == golden("score_report.txt")


# ---------------------------------------------------------------------------
# mix and stats

def test_mix_schedule_only(capsys):
    rc, out, _ = run(capsys, "mix", MANIFEST, "--regime", "cross-lingual+",
                     "--language", "it", "--schedule-only")
    assert rc == 0
    assert out.splitlines()[1].split()[0] == "mixed"
    assert out.splitlines()[2].split()[0] == "finetune-it"


def test_mix_stream_is_deterministic_jsonl(capsys):
    args = ("mix", MANIFEST, "--epochs", "2", "--batch-size", "4", "--seed", "5")
    rc, out1, _ = run(capsys, *args)
    assert rc == 0
    _, out2, _ = run(capsys, *args)
    assert out1 == out2
    _, out3, _ = run(capsys, "mix", MANIFEST, "--epochs", "2",
                     "--batch-size", "4", "--seed", "6")
    assert out1 != out3
    records = [json.loads(line) for line in out1.splitlines()]
    # pool: en 5+3, it 3, nl 2 -> 13 instances; 2 epochs of ceil(13/4) batches
    assert len(records) == 8
    assert all(set(r) == {"batch", "epoch", "instances", "stage"}
               for r in records)


def test_mix_requires_language_for_targeted_regimes(capsys):
    rc, _, err = run(capsys, "mix", MANIFEST, "--regime", "base")
    assert rc == 2
    assert "--language" in err


def test_mix_base_plus_needs_gold_train(capsys):
    rc, _, err = run(capsys, "mix", MANIFEST, "--regime", "base+",
                     "--language", "it", "--schedule-only")
    assert rc == 1
    assert "gold train" in err


def test_stats_table_matches_golden(capsys):
    rc, out, _ = run(capsys, "stats", MANIFEST)
    assert rc == 0
    assert out == golden("stats_table.txt")


def test_stats_machine_report(capsys):
    rc, out, _ = run(capsys, "stats", MANIFEST, "--report", "machine")
    assert rc == 0
    doc = json.loads(out)
    assert doc["languages"] == ["en", "it", "nl"]
    assert doc["counts"]["nl"]["silver"] == 2


# ---------------------------------------------------------------------------
# lora-demo

def test_lora_demo_defaults(capsys):
    rc, out, _ = run(capsys, "lora-demo", "--trials", "5")
    assert rc == 0
    assert "1,048,576" in out
    assert "65,536" in out
    assert out.splitlines()[-1].split()[-1] == "ok"


def test_lora_demo_rank_bound_is_a_usage_error(capsys):
    rc, _, err = run(capsys, "lora-demo", "--r", "5000")
    assert rc == 2
    assert "usage error" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "drskit.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("drskit ")
