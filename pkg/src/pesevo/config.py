"""Run configuration: JSON schema, defaults and validation.

Every section has defaults; unknown keys are rejected so that a typo in an
experiment config fails loudly instead of silently running the default.

Example::

    {
      "task": {"name": "rastrigin", "params": {"d": 2}},
      "operators": {"kind": "synthetic", "sigma0": 0.1},
      "islands": 4,
      "iterations": 500,
      "migration": {"period": 10, "elite_fraction": 0.1},
      "selection": {"tau_base": 0.2, "alpha": 4.0, "beta": 1.0},
      "seed": 7
    }
"""

from __future__ import annotations

import copy
import json
import re
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

from .archive import FeatureDescriptor
from .islands import MigrationPolicy
from .selection import SelectionParams

STRATEGIES = ("hybrid", "greedy-topk", "no-map-elites", "no-islands")
SCHEDULERS = ("deterministic", "parallel")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = f"{source or '<config>'}:{line}: " if line is not None else f"{source or '<config>'}: "
        super().__init__(where + message)


@dataclass(frozen=True)
class TaskConfig:
    name: str = "rastrigin"
    params: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class OperatorConfig:
    kind: str = "synthetic"
    sigma0: float = 0.1
    coord_prob: float | None = None
    url: str | None = None
    templates: dict[str, str] = field(default_factory=dict)
    timeout: float = 120.0
    max_in_flight: int = 4


@dataclass(frozen=True)
class RunConfig:
    task: TaskConfig = field(default_factory=TaskConfig)
    operators: OperatorConfig = field(default_factory=OperatorConfig)
    islands: int = 4
    iterations: int = 100
    migration: MigrationPolicy = field(default_factory=MigrationPolicy)
    selection: SelectionParams = field(default_factory=SelectionParams)
    descriptor: FeatureDescriptor | None = None
    seed: int = 0
    checkpoint_every: int = 0
    output_dir: str = "runs/default"
    scheduler: str = "deterministic"
    strategy: str = "hybrid"
    lineage_depth: int = 5
    context_attempts: int = 10
    target_score: float = 0.99
    stop_at_target: bool = False
    max_evaluations: int | None = None

    def __post_init__(self):
        if self.islands < 1:
            raise ValueError("islands must be >= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        if self.checkpoint_every < 0:
            raise ValueError("checkpoint_every must be >= 0")
        if self.scheduler not in SCHEDULERS:
            raise ValueError(f"scheduler must be one of {SCHEDULERS}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.lineage_depth < 0:
            raise ValueError("lineage_depth must be >= 0")
        if self.context_attempts < 0:
            raise ValueError("context_attempts must be >= 0")
        if self.max_evaluations is not None and self.max_evaluations < 0:
            raise ValueError("max_evaluations must be >= 0")
        if self.operators.kind not in ("synthetic", "endpoint"):
            raise ValueError("operators.kind must be 'synthetic' or 'endpoint'")
        if self.operators.kind == "endpoint" and not self.operators.url:
            raise ValueError("endpoint operators need a url")

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["descriptor"] = self.descriptor.to_dict() if self.descriptor else None
        return d

    def with_overrides(self, **changes) -> "RunConfig":
        return replace(self, **changes)


_SECTIONS = {
    "task": TaskConfig,
    "operators": OperatorConfig,
    "migration": MigrationPolicy,
    "selection": SelectionParams,
}


def _line_of(text: str | None, key: str) -> int | None:
    if not text:
        return None
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _check_keys(data: dict, allowed: set[str], path: str, text: str | None, source: str | None) -> None:
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown key {path + key!r}", _line_of(text, key), source)


def config_from_dict(data: dict[str, Any], text: str | None = None, source: str | None = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object", 1, source)
    data = copy.deepcopy(data)
    _check_keys(data, set(RunConfig.__dataclass_fields__), "", text, source)
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        try:
            if key in _SECTIONS:
                cls = _SECTIONS[key]
                if not isinstance(value, dict):
                    raise ConfigError(f"{key!r} must be an object", _line_of(text, key), source)
                _check_keys(value, set(cls.__dataclass_fields__), key + ".", text, source)
                kwargs[key] = cls(**value)
            elif key == "descriptor":
                kwargs[key] = None if value is None else FeatureDescriptor.from_dict(value)
            else:
                kwargs[key] = value
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"invalid {key!r}: {exc}", _line_of(text, key), source) from None
    try:
        return RunConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        bad = re.match(r"(\w+)", str(exc))
        raise ConfigError(str(exc), _line_of(text, bad.group(1)) if bad else None, source) from None


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", None, str(path)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno, str(path)) from None
    return config_from_dict(data, text, str(path))
