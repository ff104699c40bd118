import threading
import time

import numpy as np
import pytest

from pesevo.memory import LineageContext, LineageEntry, Solution
from pesevo.pipeline import EvalResult, OperatorFailure, Plan
from pesevo.tasks import rastrigin_task
from pesevo.tasks.endpoint import (
    EndpointClient,
    EndpointOperators,
    extract_code_block,
    format_lineage,
    load_templates,
    parse_genome,
    render,
)


def test_render_placeholders():
    assert render("{{task}} / {{score}} / {{unknown}}", task="T", score="1") == "T / 1 / {{unknown}}"


def test_extract_code_block():
    assert extract_code_block("here:\n```python\nx = 1\n```\n") == "x = 1"
    with pytest.raises(OperatorFailure):
        extract_code_block("no code")
    with pytest.raises(OperatorFailure):
        extract_code_block("```\na\n```\n```\nb\n```")


def test_parse_genome():
    assert parse_genome("[[0.1, 0.2, 0.3], [1, 2, 3]]", "vector") == [0.1, 0.2, 0.3, 1.0, 2.0, 3.0]
    assert parse_genome("print(1)", "code") == "print(1)"
    for bad in ("[1, ", '["a"]', "[true]"):
        with pytest.raises(OperatorFailure):
            parse_genome(bad, "vector")


def test_format_lineage():
    assert format_lineage(LineageContext()) == "(no ancestors)"
    text = format_lineage(LineageContext((LineageEntry("sol-1", "grow r", "better", 0.5),)))
    assert "sol-1" in text and "grow r" in text and "better" in text


def test_load_templates(tmp_path):
    p = tmp_path / "plan.txt"
    p.write_text("{{task}}")
    assert load_templates({"plan": str(p)}) == {"plan": "{{task}}"}
    with pytest.raises(ValueError):
        load_templates({"bogus": str(p)})


def _ops(url, **kw):
    task = rastrigin_task()
    return EndpointOperators(EndpointClient(url, **kw), task), task


def test_three_roles_round_trip(stub_model):
    stub_model.script = {
        "planner": lambda i: (0, stub_model.reply("step to the origin")),
        "executor": lambda i: (0, stub_model.reply("```json\n[0.0, 0.0]\n```")),
        "summarizer": lambda i: (0, stub_model.reply("reached the optimum")),
    }
    ops, task = _ops(stub_model.url)
    parent = Solution(solution=[1.0, 1.0], solution_id="p", score=0.3)
    rng = np.random.default_rng(0)
    plan = ops.plan(parent, LineageContext(), task, rng)
    cand = ops.execute(plan, parent, task, rng)
    summary = ops.summarize(plan, cand, task.evaluate(cand.genome), rng)
    assert (plan.blueprint, cand.genome, summary) == ("step to the origin", [0.0, 0.0], "reached the optimum")
    first = stub_model.requests[0]
    assert first["messages"][0]["role"] == "system" and "[1.0, 1.0]" in first["messages"][1]["content"]
    assert stub_model.calls == {"planner": 1, "executor": 1, "summarizer": 1}


@pytest.mark.parametrize("body", ["not json", {"choices": []}, {"choices": [{"message": {"content": ""}}]}])
def test_malformed_reply(stub_model, body):
    stub_model.script = {"planner": lambda i: (0, body)}
    ops, task = _ops(stub_model.url)
    with pytest.raises(OperatorFailure) as err:
        ops.plan(Solution(solution=[1.0, 1.0], solution_id="p"), LineageContext(), task, None)
    assert err.value.reason == "parse-error"


def test_timeout(stub_model):
    stub_model.script = {"planner": lambda i: (0.5, stub_model.reply("late"))}
    ops, task = _ops(stub_model.url, timeout=0.1)
    with pytest.raises(OperatorFailure) as err:
        ops.plan(Solution(solution=[1.0, 1.0], solution_id="p"), LineageContext(), task, None)
    assert err.value.reason == "timeout"


def test_network_error():
    client = EndpointClient("http://127.0.0.1:9/v1/chat/completions", timeout=1.0)
    with pytest.raises(OperatorFailure) as err:
        client.complete("planner", "s", "u")
    assert err.value.reason.startswith("network-error")


def test_max_in_flight(stub_model):
    active = [0]
    peak = [0]
    lock = threading.Lock()

    def slow(i):
        with lock:
            active[0] += 1
            peak[0] = max(peak[0], active[0])
        time.sleep(0.05)
        with lock:
            active[0] -= 1
        return 0, stub_model.reply("ok")

    stub_model.script = {"planner": slow}
    client = EndpointClient(stub_model.url, max_in_flight=2)
    threads = [threading.Thread(target=client.complete, args=("planner", "You plan the next step", "u")) for _ in range(6)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert stub_model.calls["planner"] == 6 and peak[0] <= 2
