"""Few-shot prompt construction, pluggable completion backends, SQL extraction.

Prompts follow a fixed template: the created-tables header with one CREATE
statement per table, the request line asking for a query over all the
tables, an optional clause-bias constraint sentence, and, for few-shot
settings, an enumerated list of seed example statements. Every prompt is a
pure function of its inputs, so a persisted (subschema, setting, example)
tuple reconstructs it byte for byte.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

import requests

from .errors import ArityError, BackendError
from .schema import SchemaCatalog, render_create_statements
from .subschema import Subschema
from .util import stable_hash_hex

if TYPE_CHECKING:  # only for annotations; avoids an import cycle
    from .mechgen import SeedExample

BIAS_NONE = "none"
BIAS_ORDER_BY = "order_by"
BIAS_GROUP_BY = "group_by"

#: Constraint sentences inserted before the examples for biased settings.
#: The group-by sentence is fixed wording; the order-by one is this
#: toolkit's symmetric counterpart and can be overridden per call.
BIAS_SENTENCES = {
    BIAS_GROUP_BY: (
        "Whenever possible, please use a group by clause. "
        "Use operators for more complex groups."
    ),
    BIAS_ORDER_BY: "Whenever possible, please use an order by clause.",
}

PROMPT_HEADER = "These tables have been created:"
PROMPT_REQUEST = "Write an interesting and complicated SQL query that uses all of these tables:"
PROMPT_EXAMPLES_HEADER = "These are some examples:"


@dataclass(frozen=True)
class PromptSetting:
    shots: int = 0
    bias: str = BIAS_NONE

    def __post_init__(self):
        if self.shots < 0:
            raise ValueError("shots must be >= 0")
        if self.bias not in (BIAS_NONE, BIAS_ORDER_BY, BIAS_GROUP_BY):
            raise ValueError(f"unknown bias {self.bias!r}")

    @property
    def label(self) -> str:
        return f"{self.shots}-shot:{self.bias}"

    def to_dict(self) -> dict:
        return {"shots": self.shots, "bias": self.bias}

    @staticmethod
    def from_dict(data: dict) -> "PromptSetting":
        return PromptSetting(shots=data["shots"], bias=data["bias"])

    @staticmethod
    def parse(label: str) -> "PromptSetting":
        """Parse "3-shot:group_by" or "3:group_by" style labels."""
        m = re.fullmatch(r"(\d+)(?:-shot)?:(\w+)", label.strip())
        if not m:
            raise ValueError(f"cannot parse prompt setting {label!r}")
        return PromptSetting(shots=int(m.group(1)), bias=m.group(2))


#: The six canonical settings: {0, 3} shots x {none, order_by, group_by}.
CANONICAL_SETTINGS = tuple(
    PromptSetting(shots=shots, bias=bias)
    for shots in (0, 3)
    for bias in (BIAS_NONE, BIAS_ORDER_BY, BIAS_GROUP_BY)
)


@dataclass
class GenParams:
    temperature: float = 0.8
    top_p: float = 0.95
    repetition_penalty: float = 1.05
    n_completions: int = 5
    max_tokens: int = 512

    def validate(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")
        if self.repetition_penalty < 1:
            raise ValueError("repetition_penalty must be >= 1")
        if self.n_completions < 1:
            raise ValueError("n_completions must be >= 1")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")

    def to_dict(self) -> dict:
        return {
            "temperature": self.temperature,
            "top_p": self.top_p,
            "repetition_penalty": self.repetition_penalty,
            "n_completions": self.n_completions,
            "max_tokens": self.max_tokens,
        }

    @staticmethod
    def from_dict(data: dict) -> "GenParams":
        return GenParams(**data)


def prompt_hash(prompt: str) -> str:
    return stable_hash_hex(prompt, length=16)


@dataclass
class PromptSpec:
    """Everything a prompt is rendered from; kept for auditability."""

    create_statements: list[str]
    table_names: list[str]
    constraint_text: str | None
    seed_examples: list[str]  # example SQL texts, in prompt order
    generation_params: GenParams

    def __post_init__(self):
        named = set()
        for statement in self.create_statements:
            m = re.search(r"CREATE TABLE\s+(\S+)", statement, re.IGNORECASE)
            if m:
                named.add(m.group(1).lower())
        if named != {t.lower() for t in self.table_names}:
            raise ValueError(
                f"table names {sorted(self.table_names)} do not match the "
                f"CREATE statements {sorted(named)}"
            )


def make_prompt_spec(
    subschema: Subschema,
    catalog: SchemaCatalog,
    setting: PromptSetting,
    examples: "list[SeedExample]",
    params: GenParams | None = None,
    column_filter: dict | None = None,
    bias_sentences: dict | None = None,
) -> PromptSpec:
    if len(examples) != setting.shots:
        raise ArityError(f"setting wants {setting.shots} examples, got {len(examples)}")
    statements = render_create_statements(
        catalog, table_filter=set(subschema.tables), column_filter=column_filter
    )
    sentences = dict(BIAS_SENTENCES)
    if bias_sentences:
        sentences.update(bias_sentences)
    return PromptSpec(
        create_statements=statements,
        table_names=list(subschema.tables),
        constraint_text=sentences[setting.bias] if setting.bias != BIAS_NONE else None,
        seed_examples=[example.sql for example in examples],
        generation_params=params or GenParams(),
    )


def render_prompt(spec: PromptSpec) -> str:
    parts = [PROMPT_HEADER, ""]
    for statement in spec.create_statements:
        parts.append(statement)
        parts.append("")
    parts.append(PROMPT_REQUEST)
    parts.append(", ".join(spec.table_names))
    if spec.constraint_text:
        parts.append("")
        parts.append(spec.constraint_text)
    if spec.seed_examples:
        parts.append("")
        parts.append(PROMPT_EXAMPLES_HEADER)
        for index, sql in enumerate(spec.seed_examples, start=1):
            parts.append(f"{index}. {sql}")
    return "\n".join(parts) + "\n"


def build_prompt(
    subschema: Subschema,
    catalog: SchemaCatalog,
    setting: PromptSetting,
    examples: "list[SeedExample]",
    column_filter: dict | None = None,
    bias_sentences: dict | None = None,
) -> str:
    """Render the generation prompt; pure and byte-deterministic.

    ``column_filter`` narrows the CREATE statements to a targeted column
    subset (coverage-gap steering); ``bias_sentences`` overrides the default
    constraint wording per bias.
    """
    spec = make_prompt_spec(
        subschema,
        catalog,
        setting,
        examples,
        column_filter=column_filter,
        bias_sentences=bias_sentences,
    )
    return render_prompt(spec)


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------


class StubBackend:
    """Deterministic test backend replaying canned completions.

    Reads ``<prompt-hash>.json`` files ({"completions": [...]}) from a
    directory; a missing file is a (non-retryable) backend error.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def complete(self, prompt: str, params: GenParams) -> list[str]:
        path = self.directory / f"{prompt_hash(prompt)}.json"
        if not path.exists():
            raise BackendError(f"no canned completions for prompt hash {prompt_hash(prompt)}")
        data = json.loads(path.read_text(encoding="utf-8"))
        completions = data.get("completions")
        if not isinstance(completions, list):
            raise BackendError(f"{path.name}: malformed stub file")
        return [str(c) for c in completions][: params.n_completions]

    @staticmethod
    def store(directory: str | Path, prompt: str, completions: list[str]) -> Path:
        """Write a canned-completion file for ``prompt``; returns its path."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{prompt_hash(prompt)}.json"
        path.write_text(
            json.dumps({"completions": completions}, indent=2) + "\n", encoding="utf-8"
        )
        return path


class HttpBackend:
    """Minimal JSON-over-HTTP completion backend.

    POSTs ``{"model": ..., "prompt": ..., "params": {...}}`` with optional
    bearer-token auth (token read from an environment variable) and expects
    ``{"completions": ["...", ...]}`` back. Network failures and 5xx
    responses raise retryable backend errors; the caller owns retry policy.
    """

    def __init__(
        self,
        url: str,
        model: str,
        auth_env: str = "SQLSYNTH_API_TOKEN",
        timeout: float = 60.0,
        session=None,
    ):
        self.url = url
        self.model = model
        self.auth_env = auth_env
        self.timeout = timeout
        self.session = session or requests.Session()

    def complete(self, prompt: str, params: GenParams) -> list[str]:
        import os

        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.auth_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        payload = {"model": self.model, "prompt": prompt, "params": params.to_dict()}
        try:
            response = self.session.post(
                self.url, json=payload, headers=headers, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise BackendError(f"backend unreachable: {exc}", retryable=True) from exc
        if response.status_code >= 500:
            raise BackendError(f"backend error {response.status_code}", retryable=True)
        if response.status_code != 200:
            raise BackendError(f"backend rejected request: {response.status_code}")
        try:
            data = response.json()
            completions = data["completions"]
        except (ValueError, KeyError) as exc:
            raise BackendError(f"malformed backend response: {exc}") from exc
        if not isinstance(completions, list):
            raise BackendError("malformed backend response: completions is not a list")
        return [str(c) for c in completions]


def generate_llm(prompt: str, backend, params: GenParams) -> list[str]:
    """Request completions; returns at most ``params.n_completions`` strings."""
    params.validate()
    completions = backend.complete(prompt, params)
    return list(completions)[: params.n_completions]


# ---------------------------------------------------------------------------
# SQL extraction from completions
# ---------------------------------------------------------------------------

_FENCE_RE = re.compile(r"```[ \t]*(?:\w+)?[ \t]*\n?(.*?)```", re.DOTALL)
_SQL_START_RE = re.compile(r"\b(select|with)\b", re.IGNORECASE)
# A WITH only counts as a SQL start when it opens a CTE ("WITH name AS ("),
# so prose like "help with that" is not mistaken for a query.
_CTE_HEAD_RE = re.compile(
    r"with\s+(recursive\s+)?[A-Za-z_\"`][\w\"`]*\s*(\([^)]*\))?\s+as\s*\(",
    re.IGNORECASE,
)


def _find_sql_start(text: str) -> int | None:
    for m in _SQL_START_RE.finditer(text):
        if m.group(1).lower() == "select":
            return m.start()
        if _CTE_HEAD_RE.match(text, m.start()):
            return m.start()
    return None


def extract_sql(completion: str) -> list[str]:
    """Pull candidate SQL out of a raw completion.

    Fenced code blocks win when present (one candidate per block that
    contains SQL); otherwise the longest substring starting at the first
    SELECT (or CTE-opening WITH) token and ending at a statement terminator
    or end of text. Returns a possibly-empty list; every element contains a
    SELECT or WITH token by construction.
    """
    fences = _FENCE_RE.findall(completion)
    if fences:
        candidates = []
        for block in fences:
            start = _find_sql_start(block)
            if start is not None:
                candidates.append(block[start:].strip())
        return candidates
    start = _find_sql_start(completion)
    if start is None:
        return []
    tail = completion[start:]
    terminator = tail.find(";")
    if terminator != -1:
        tail = tail[: terminator + 1]
    return [tail.strip()]
