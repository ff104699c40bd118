"""Operators backed by a remote chat-completions style model endpoint.

Each role sends one POST with ``{"messages": [...], "temperature", "max_tokens"}``
and reads the reply text from ``choices[0].message.content``. Templates use
``{{parent_code}}``, ``{{lineage}}``, ``{{task}}``, ``{{plan}}``,
``{{score}}`` and ``{{logs}}`` placeholders.
"""

from __future__ import annotations

import json
import re
import threading
from collections.abc import Mapping
from pathlib import Path

import httpx

from ..memory import LineageContext, Solution
from ..pipeline import Candidate, EvalResult, OperatorContract, OperatorFailure, Plan
from .base import TaskSpec

PLACEHOLDERS = ("parent_code", "lineage", "task", "plan", "score", "logs")

SYSTEM_PROMPTS = {
    "planner": "You plan the next improvement to a candidate solution. Reply with a concise plan.",
    "executor": "You implement a plan. Reply with the complete new solution in exactly one fenced code block.",
    "summarizer": "You review an attempt. Reply with a short insight for the next generation.",
}

DEFAULT_TEMPLATES = {
    "plan": "Task:\n{{task}}\n\nCurrent solution (score {{score}}):\n```\n{{parent_code}}\n```\n\nLineage:\n{{lineage}}\n",
    "exec": "Task:\n{{task}}\n\nPlan:\n{{plan}}\n\nCurrent solution:\n```\n{{parent_code}}\n```\n",
    "sum": "Plan:\n{{plan}}\n\nResult score: {{score}}\nLogs:\n{{logs}}\n",
}

_FENCE_RE = re.compile(r"```[^\n`]*\n(.*?)```", re.DOTALL)


def render(template: str, **values: str) -> str:
    for key in PLACEHOLDERS:
        template = template.replace("{{" + key + "}}", str(values.get(key, "")))
    return template


def extract_code_block(text: str) -> str:
    blocks = _FENCE_RE.findall(text)
    if len(blocks) != 1:
        raise OperatorFailure("executor", "parse-error")
    return blocks[0].strip("\n")


def format_lineage(context: LineageContext) -> str:
    if not context.entries:
        return "(no ancestors)"
    lines = []
    for e in context.entries:
        lines.append(f"- {e.solution_id} score={e.score:.6g}\n  plan: {e.generate_plan}\n  summary: {e.summary}")
    return "\n".join(lines)


def genome_text(genome) -> str:
    return genome if isinstance(genome, str) else json.dumps([float(x) for x in genome])


def parse_genome(text: str, kind: str):
    if kind == "code":
        return text
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        raise OperatorFailure("executor", "parse-error") from None
    flat: list[float] = []
    stack = [data]
    # flatten nested lists, e.g. [[x, y, r], ...]
    while stack:
        item = stack.pop(0)
        if isinstance(item, list):
            stack[0:0] = item
        elif isinstance(item, (int, float)) and not isinstance(item, bool):
            flat.append(float(item))
        else:
            raise OperatorFailure("executor", "parse-error")
    return flat


class EndpointClient:
    def __init__(
        self,
        url: str,
        timeout: float = 120.0,
        max_in_flight: int = 4,
        temperature: float = 0.7,
        max_tokens: int = 4096,
        headers: Mapping[str, str] | None = None,
    ):
        self.url = url
        self.timeout = timeout
        self.temperature = temperature
        self.max_tokens = max_tokens
        self._client = httpx.Client(timeout=timeout, headers=dict(headers or {}))
        self._slots = threading.BoundedSemaphore(max_in_flight)

    def complete(self, role: str, system: str, user: str) -> str:
        body = {
            "messages": [{"role": "system", "content": system}, {"role": "user", "content": user}],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }
        with self._slots:
            try:
                resp = self._client.post(self.url, json=body)
                resp.raise_for_status()
            except httpx.TimeoutException:
                raise OperatorFailure(role, "timeout") from None
            except httpx.HTTPError as exc:
                raise OperatorFailure(role, f"network-error: {exc}") from None
        try:
            text = resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            raise OperatorFailure(role, "parse-error") from None
        if not isinstance(text, str) or not text.strip():
            raise OperatorFailure(role, "parse-error")
        return text

    def close(self) -> None:
        self._client.close()


class EndpointOperators:
    def __init__(self, client: EndpointClient, task: TaskSpec, templates: Mapping[str, str] | None = None):
        self.client = client
        self.task = task
        self.templates = {**DEFAULT_TEMPLATES, **(templates or {})}

    def plan(self, parent: Solution, context: LineageContext, task, rng) -> Plan:
        user = render(
            self.templates["plan"],
            parent_code=genome_text(parent.solution),
            lineage=format_lineage(context),
            task=self.task.description,
            score=repr(parent.score),
        )
        text = self.client.complete("planner", SYSTEM_PROMPTS["planner"], user)
        return Plan(text.strip())

    def execute(self, plan: Plan, parent: Solution, task, rng) -> Candidate:
        user = render(
            self.templates["exec"],
            parent_code=genome_text(parent.solution),
            plan=plan.blueprint,
            task=self.task.description,
            score=repr(parent.score),
        )
        text = self.client.complete("executor", SYSTEM_PROMPTS["executor"], user)
        return Candidate(parse_genome(extract_code_block(text), self.task.genome_kind))

    def summarize(self, plan: Plan, candidate: Candidate, result: EvalResult, rng) -> str:
        user = render(
            self.templates["sum"],
            parent_code=genome_text(candidate.genome),
            plan=plan.blueprint,
            task=self.task.description,
            score=repr(result.score),
            logs=result.logs,
        )
        return self.client.complete("summarizer", SYSTEM_PROMPTS["summarizer"], user).strip()

    def contract(self) -> OperatorContract:
        return OperatorContract(self.plan, self.execute, self.summarize)


def load_templates(paths: Mapping[str, str]) -> dict[str, str]:
    unknown = set(paths) - set(DEFAULT_TEMPLATES)
    if unknown:
        raise ValueError(f"unknown template roles: {sorted(unknown)}")
    return {role: Path(p).read_text() for role, p in paths.items()}


def model_endpoint_operators(
    url: str,
    task: TaskSpec,
    templates: Mapping[str, str] | None = None,
    timeout: float = 120.0,
    max_in_flight: int = 4,
) -> OperatorContract:
    client = EndpointClient(url, timeout=timeout, max_in_flight=max_in_flight)
    return EndpointOperators(client, task, templates).contract()
