from .base import TaskSpec
from .circle_packing import circle_packing_task, eval_circle_packing
from .code import code_task
from .endpoint import model_endpoint_operators
from .rastrigin import eval_rastrigin, rastrigin_task
from .synthetic import SyntheticOperators, synthetic_operators

BUILTIN_TASKS = {
    "rastrigin": rastrigin_task,
    "circle_packing": circle_packing_task,
}


def make_task(name: str, params: dict | None = None) -> TaskSpec:
    try:
        factory = BUILTIN_TASKS[name]
    except KeyError:
        raise ValueError(f"unknown task {name!r}; choose from {sorted(BUILTIN_TASKS)}") from None
    return factory(**(params or {}))


__all__ = [
    "BUILTIN_TASKS",
    "SyntheticOperators",
    "TaskSpec",
    "circle_packing_task",
    "code_task",
    "eval_circle_packing",
    "eval_rastrigin",
    "make_task",
    "model_endpoint_operators",
    "rastrigin_task",
    "synthetic_operators",
]
