import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pesevo.memory import LineageContext, LineageEntry, Solution
from pesevo.tasks import circle_packing_task, eval_circle_packing, eval_rastrigin, make_task, rastrigin_task
from pesevo.tasks.circle_packing import grid_seed
from pesevo.tasks.synthetic import SIGMA_MAX, SIGMA_MIN, SyntheticOperators, lineage_deltas, next_sigma


def test_rastrigin_examples():
    assert eval_rastrigin([0.0, 0.0], 2).score == 1.0
    r = eval_rastrigin([0.5, 0.5], 2)
    # f = 20 + 2 * (0.25 - 10 cos(pi)) = 40.5
    assert r.aux_metrics["f"] == pytest.approx(40.5, abs=1e-12)
    assert r.score == pytest.approx(1 / 41.5, abs=1e-15)
    with pytest.raises(ValueError):
        eval_rastrigin([0.0], 2)
    with pytest.raises(ValueError):
        eval_rastrigin([6.0, 0.0], 2)


@given(st.lists(st.floats(-5.12, 5.12), min_size=2, max_size=2))
def test_rastrigin_score_range(x):
    s = eval_rastrigin(x, 2).score
    assert 0 < s <= 1


def test_rastrigin_task_options():
    t = rastrigin_task(d=6)
    assert t.descriptor.dims[0].name == "mean"
    with pytest.raises(ValueError):
        rastrigin_task(d=6, features="coords")
    with pytest.raises(ValueError):
        make_task("nope")


def test_circle_single_optimum():
    r = eval_circle_packing([0.5, 0.5, 0.5], 1)
    assert r.feasible and r.aux_metrics["raw_sum"] == 0.5


def test_circle_overlap_infeasible():
    r = eval_circle_packing([0.3, 0.3, 0.2, 0.35, 0.35, 0.2], 2)
    assert not r.feasible
    assert r.aux_metrics["violation"] == pytest.approx(0.4 - math.sqrt(0.005), abs=1e-15)
    assert r.score == pytest.approx(max(0.0, 0.4 - (0.4 - math.sqrt(0.005))), abs=1e-15)


def test_circle_containment():
    assert not eval_circle_packing([0.1, 0.5, 0.2], 1).feasible
    assert eval_circle_packing([0.2, 0.5, 0.2], 1).feasible


def test_circle_wrong_length():
    with pytest.raises(ValueError):
        eval_circle_packing([0.5, 0.5], 1)


def test_circle_26_normalised_by_best_known():
    task = circle_packing_task(26)
    genome = grid_seed(26)
    r = task.evaluate(genome)
    assert r.feasible
    assert r.score == pytest.approx(r.aux_metrics["raw_sum"] / 2.6359, rel=1e-15)
    assert task.verify(genome) == (True, "")


@pytest.mark.parametrize("n", [1, 2, 5, 10, 26])
def test_grid_seed_is_feasible(n):
    assert eval_circle_packing(grid_seed(n), n).feasible


def test_next_sigma_rule():
    assert next_sigma(0.1, []) == 0.1
    assert next_sigma(0.1, [1, 1, 0, 0, 0]) == pytest.approx(0.15)
    assert next_sigma(0.1, [1, 0, 0, 0, 0, 0, 0, 0, 0, 0]) == pytest.approx(0.075)
    assert next_sigma(0.45, [1.0]) == SIGMA_MAX
    assert next_sigma(SIGMA_MIN, [0.0]) == SIGMA_MIN
    # only the last ten deltas count
    assert next_sigma(0.1, [1] * 5 + [0] * 10) == pytest.approx(0.075)


@given(st.floats(1e-6, 1.0), st.lists(st.floats(-1, 1), max_size=30))
def test_next_sigma_bounded(prev, deltas):
    s = next_sigma(prev, deltas)
    if deltas:
        assert SIGMA_MIN <= s <= SIGMA_MAX


def test_lineage_deltas_prefers_attempts():
    parent = Solution(solution_id="p", score=0.5)
    ctx = LineageContext((LineageEntry("a", "p", "s", 0.1), LineageEntry("b", "p", "s", 0.3)))
    assert lineage_deltas(parent, ctx) == pytest.approx([0.2, 0.2])
    ctx2 = LineageContext(ctx.entries, (LineageEntry("c", "p", "s", 0.4), LineageEntry("d", "p", "s", 0.6)))
    assert lineage_deltas(parent, ctx2) == pytest.approx([-0.1, 0.1])


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_synthetic_operators_respect_bounds(seed):
    task = circle_packing_task(5)
    ops = SyntheticOperators(task, sigma0=0.5)
    rng = np.random.default_rng(seed)
    parent = Solution(solution=grid_seed(5), solution_id="p", score=0.2)
    plan = ops.plan(parent, LineageContext(), task, rng)
    cand = ops.execute(plan, parent, task, rng)
    assert task.verify(cand.genome) == (True, "")
    changed = np.flatnonzero(np.array(cand.genome) != np.array(parent.solution))
    assert set(changed) <= {int(i) for i in plan.hints["dims"].split(",")}


def test_synthetic_summary():
    task = rastrigin_task()
    ops = SyntheticOperators(task)
    parent = Solution(solution=[4.0, 4.0], solution_id="p", score=0.02)
    rng = np.random.default_rng(1)
    plan = ops.plan(parent, LineageContext(), task, rng)
    cand = ops.execute(plan, parent, task, rng)
    text = ops.summarize(plan, cand, task.evaluate(cand.genome), rng)
    assert text.startswith("delta=") and "sigma=" in text


def test_synthetic_rejects_code_tasks():
    from pesevo.tasks import code_task
    from pesevo.pipeline import EvalResult

    with pytest.raises(ValueError):
        SyntheticOperators(code_task("c", lambda s: EvalResult(1.0), "x=1"))
