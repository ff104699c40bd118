import json

import pytest

from pesevo.cli import main
from pesevo.engine import read_events
from pesevo.report import build_report

CONFIG = """{
  "task": {"name": "rastrigin", "params": {"d": 2}},
  "islands": 2,
  "iterations": 25,
  "checkpoint_every": 10,
  "migration": {"period": 5},
  "seed": 3
}
"""


@pytest.fixture
def config_file(tmp_path):
    p = tmp_path / "run.json"
    p.write_text(CONFIG)
    return p


def test_run_writes_outputs(tmp_path, config_file, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(config_file), "--out", str(out)]) == 0
    for name in ("events.jsonl", "timings.jsonl", "archives.json", "solutions.jsonl", "report.json", "checkpoint-20.json"):
        assert (out / name).exists(), name
    report = json.loads((out / "report.json").read_text())
    events = read_events(out / "events.jsonl")
    rebuilt = build_report(events)
    assert report["best"] == rebuilt["best"] and report["totals"] == rebuilt["totals"]
    assert report["totals"]["iterations"] == 25
    assert report["totals"]["generations"] == 50
    assert capsys.readouterr().out.startswith(f"best {report['best']['solution_id']}")


def test_env_overrides(tmp_path, config_file, monkeypatch):
    monkeypatch.setenv("ENGINE_SEED", "99")
    monkeypatch.setenv("ENGINE_OUT", str(tmp_path / "env"))
    assert main(["run", "--config", str(config_file)]) == 0
    ckpt = json.loads((tmp_path / "env" / "checkpoint-10.json").read_text())
    assert ckpt["run_config"]["seed"] == 99


def test_resume_cli(tmp_path, config_file):
    out = tmp_path / "out"
    main(["run", "--config", str(config_file), "--out", str(out)])
    full = (out / "events.jsonl").read_bytes()
    assert main(["resume", "--checkpoint", str(out / "checkpoint-10.json")]) == 0
    assert (out / "events.jsonl").read_bytes() == full


def test_unknown_key_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "islands": 2,\n  "migraton": {"period": 5}\n}\n')
    assert main(["run", "--config", str(p)]) == 2
    assert f"{p}:3:" in capsys.readouterr().err


def test_bad_value_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "islands": 2,\n  "selection": {\n    "tau_base": -1\n  }\n}\n')
    assert main(["run", "--config", str(p)]) == 2
    assert f"{p}:3:" in capsys.readouterr().err


def test_json_syntax_error(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "islands": 2,\n  oops\n}\n')
    assert main(["run", "--config", str(p)]) == 2
    assert f"{p}:3:" in capsys.readouterr().err


def test_usage_errors():
    assert main([]) == 2
    assert main(["run"]) == 2


def test_missing_checkpoint(tmp_path):
    assert main(["resume", "--checkpoint", str(tmp_path / "nope.json")]) == 1


def test_inspect_queries(tmp_path, config_file, capsys):
    out = tmp_path / "out"
    main(["run", "--config", str(config_file), "--out", str(out)])
    capsys.readouterr()
    assert main(["inspect", str(out), "--query", "best"]) == 0
    best = json.loads(capsys.readouterr().out)
    assert main(["inspect", str(out), "--query", f"lineage {best['solution_id']}"]) == 0
    chain = json.loads(capsys.readouterr().out)
    assert chain[0]["generation"] == 0 and chain[-1]["solution_id"] == best["solution_id"]
    assert [c["generation"] for c in chain] == list(range(len(chain)))
    archives = json.loads((out / "archives.json").read_text())
    index = archives["islands"][0]["cells"][0]["index"]
    assert main(["inspect", str(out), "--query", f"cell {index[0]},{index[1]}"]) == 0
    assert json.loads(capsys.readouterr().out)[0]["index"] == index
    assert main(["inspect", str(out), "--query", "entropy-series"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "iteration,island,entropy,tau" and len(lines) == 51
    assert main(["inspect", str(out), "--query", "score-series"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 26
    assert main(["inspect", str(out), "--query", "lineage sol-999999"]) == 1
    assert main(["inspect", str(out), "--query", "frobnicate"]) == 1
    assert main(["inspect", str(tmp_path / "missing"), "--query", "best"]) == 1


def test_compare(tmp_path, config_file, capsys):
    out = tmp_path / "rows.json"
    assert main(["compare", "--config", str(config_file), "--strategies", "hybrid,greedy-topk", "--seeds", "2", "--json", str(out)]) == 0
    rows = json.loads(out.read_text())
    assert [r["strategy"] for r in rows] == ["hybrid", "greedy-topk"]
    assert "success_rate" in capsys.readouterr().out
    assert main(["compare", "--config", str(config_file), "--strategies", "bogus"]) == 2
