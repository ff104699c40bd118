"""Source-code genomes evaluated by a caller-supplied function."""

from __future__ import annotations

from collections.abc import Callable

from ..archive import FeatureDescriptor, code_features, default_code_descriptor
from ..pipeline import EvalResult, verify_python_syntax
from .base import TaskSpec


def code_task(
    name: str,
    evaluate: Callable[[str], EvalResult],
    seed_code: str,
    description: str = "",
    descriptor: FeatureDescriptor | None = None,
    target_score: float = 1.0,
) -> TaskSpec:
    """Wrap a user evaluator as a Python-source task.

    Candidates are syntax-checked with :func:`ast.parse` before ``evaluate``
    ever sees them; the engine itself never executes generated code.
    """
    return TaskSpec(
        name=name,
        genome_kind="code",
        evaluate=evaluate,
        verify=verify_python_syntax,
        features=code_features,
        descriptor=descriptor or default_code_descriptor(),
        seed_genome=lambda: seed_code,
        target_score=target_score,
        description=description,
    )
