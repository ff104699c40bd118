import json

import pytest

from pesevo.config import RunConfig, TaskConfig
from pesevo.engine import CheckpointError, Engine, TaskError, read_events
from pesevo.islands import MigrationPolicy
from pesevo.pipeline import EvalResult
from pesevo.tasks import code_task


def cfg(**kw):
    base = dict(task=TaskConfig("rastrigin", {"d": 2}), islands=3, iterations=30, seed=11)
    base.update(kw)
    return RunConfig(**base)


def run_to(tmp, config, stop_after=None):
    engine = Engine(config, output_dir=tmp)
    try:
        result = engine.run(stop_after=stop_after)
    finally:
        engine.close()
    return result


def test_events_are_reproducible(tmp_path):
    run_to(tmp_path / "a", cfg())
    run_to(tmp_path / "b", cfg())
    a = (tmp_path / "a" / "events.jsonl").read_bytes()
    assert a == (tmp_path / "b" / "events.jsonl").read_bytes()
    run_to(tmp_path / "c", cfg(seed=12))
    assert a != (tmp_path / "c" / "events.jsonl").read_bytes()


def test_resume_matches_uninterrupted(tmp_path):
    run_to(tmp_path / "full", cfg(checkpoint_every=5))
    run_to(tmp_path / "part", cfg(checkpoint_every=5), stop_after=17)
    # resume from an earlier checkpoint: later events get truncated and replayed
    engine = Engine.resume(tmp_path / "part" / "checkpoint-15.json")
    assert engine.iteration == 15
    engine.run(stop_after=23)
    engine.close()
    engine = Engine.resume(tmp_path / "part" / "checkpoint-20.json")
    engine.run()
    engine.close()
    assert (tmp_path / "full" / "events.jsonl").read_bytes() == (tmp_path / "part" / "events.jsonl").read_bytes()


def test_corrupt_checkpoint(tmp_path):
    bad = tmp_path / "checkpoint-1.json"
    bad.write_text("{not json")
    with pytest.raises(CheckpointError):
        Engine.resume(bad)
    bad.write_text(json.dumps({"run_config": {}}))
    with pytest.raises(CheckpointError):
        Engine.resume(bad)


def test_truncated_log_rejected(tmp_path):
    run_to(tmp_path, cfg(checkpoint_every=10, iterations=10))
    (tmp_path / "events.jsonl").write_text("")
    with pytest.raises(CheckpointError):
        Engine.resume(tmp_path / "checkpoint-10.json")


def test_single_island_reduction():
    """K=1 with migration off is plain MAP-Elites with Boltzmann selection."""
    a = Engine(cfg(islands=1, migration=MigrationPolicy(enabled=False))).run()
    b = Engine(cfg(islands=4, strategy="no-islands")).run()
    strip = lambda evs: [e for e in evs if e["event"] != "init"]
    assert strip(a.events) == strip(b.events)
    assert not any(e["event"] == "migration" for e in a.events)


def test_migration_events_on_period():
    res = Engine(cfg(migration=MigrationPolicy(period=7))).run()
    assert [e["iteration"] for e in res.events if e["event"] == "migration"] == [7, 14, 21, 28]


def test_strategies(tmp_path):
    greedy = Engine(cfg(strategy="greedy-topk")).run()
    assert all(max(e["probabilities"].values()) == 1.0 for e in greedy.events if e["event"] == "selection")
    flat = Engine(cfg(strategy="no-map-elites")).run()
    assert all(len(isl.archive) == 1 for isl in flat.islands)


def test_parallel_scheduler_runs():
    res = Engine(cfg(scheduler="parallel", iterations=20)).run()
    gens = [e for e in res.events if e["event"] == "generation"]
    assert len(gens) == 60
    # event order stays island-ordered within an iteration
    assert [e["island_id"] for e in gens[:3]] == [0, 1, 2]


def test_stop_conditions():
    res = Engine(cfg(iterations=1000, max_evaluations=25)).run()
    assert res.iteration < 1000
    evals = sum(1 for e in res.events if e["event"] == "generation" and e["status"] == "evaluated")
    assert 25 <= evals < 25 + 3
    res = Engine(cfg(iterations=3000, stop_at_target=True, target_score=0.5)).run()
    assert res.best.score >= 0.5 and res.iteration < 3000


def test_outputs(tmp_path):
    engine = Engine(cfg(), output_dir=tmp_path)
    engine.run()
    engine.write_outputs({"ok": True})
    engine.close()
    assert json.loads((tmp_path / "report.json").read_text()) == {"ok": True}
    archives = json.loads((tmp_path / "archives.json").read_text())
    assert len(archives["islands"]) == 3
    lines = (tmp_path / "solutions.jsonl").read_text().splitlines()
    assert len(lines) == len(engine.store)
    timings = [json.loads(l) for l in (tmp_path / "timings.jsonl").read_text().splitlines()]
    assert len(timings) == 90 and "plan" in timings[0]["durations"]


def test_bad_seed_raises_task_error():
    task = code_task("broken", lambda s: EvalResult(0.0), "def f(:")
    with pytest.raises(TaskError):
        Engine(cfg(), task=task, contract=object()).run()


def test_best_is_monotone_per_iteration():
    res = Engine(cfg(iterations=60)).run()
    scores = [e["best_score"] for e in res.events if e["event"] == "iteration"]
    assert all(b >= a for a, b in zip(scores, scores[1:]))
