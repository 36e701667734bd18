"""Shared domain types: queries, tools, traces, run records, cluster fixtures.

Everything here is immutable after construction so instances can be shared
freely across worker threads.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

ACTION_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")

POD_PHASES = ("Running", "Succeeded", "Pending", "Failed")
PORT_PROTOCOLS = ("TCP", "UDP")

TOOL_IDS = tuple(f"T{i}" for i in range(1, 10))


class Category(enum.Enum):
    """Query category: simple reasoning (at most one tool) vs advanced (two or more)."""

    SR = "SR"
    AR = "AR"


class FailureKind(enum.Enum):
    NONE = "none"
    HALLUCINATION = "hallucination"
    DEFLECTION = "deflection"
    FLAWED_REASONING = "flawed_reasoning"
    TRUNCATION = "truncation"
    TOOL_MISUSE = "tool_misuse"
    TIMEOUT = "timeout"
    PARSE_ERROR = "parse_error"
    BACKEND_ERROR = "backend_error"


class DomainError(ValueError):
    """Invariant violation in a domain object."""


# ---------------------------------------------------------------------------
# Agent traces
# ---------------------------------------------------------------------------

THOUGHT = "thought"
ACTION = "action"
OBSERVATION = "observation"
FINAL = "final"


@dataclass(frozen=True)
class AgentEvent:
    """One event of an agent run.

    ``kind`` is one of thought/action/observation/final; ``text`` carries the
    payload for everything except actions, which use ``action_name`` and
    ``input_text``.
    """

    kind: str
    text: str = ""
    action_name: str = ""
    input_text: str = ""

    @staticmethod
    def thought(text: str) -> "AgentEvent":
        return AgentEvent(kind=THOUGHT, text=text)

    @staticmethod
    def action(action_name: str, input_text: str) -> "AgentEvent":
        return AgentEvent(kind=ACTION, action_name=action_name, input_text=input_text)

    @staticmethod
    def observation(text: str) -> "AgentEvent":
        return AgentEvent(kind=OBSERVATION, text=text)

    @staticmethod
    def final(text: str) -> "AgentEvent":
        return AgentEvent(kind=FINAL, text=text)


AgentTrace = tuple[AgentEvent, ...]


def validate_trace(events: AgentTrace) -> None:
    """Check trace ordering invariants.

    Every action must be immediately followed by exactly one observation, and
    at most one final answer may appear, in last position.
    """
    for i, ev in enumerate(events):
        if ev.kind == ACTION:
            if i + 1 >= len(events) or events[i + 1].kind != OBSERVATION:
                raise DomainError(f"action at index {i} has no observation")
            if i + 2 < len(events) and events[i + 2].kind == OBSERVATION:
                raise DomainError(f"action at index {i} has more than one observation")
        elif ev.kind == OBSERVATION:
            if i == 0 or events[i - 1].kind not in (ACTION, THOUGHT):
                raise DomainError(f"observation at index {i} follows nothing observable")
        elif ev.kind == FINAL:
            if i != len(events) - 1:
                raise DomainError("final answer is not the last event")
        elif ev.kind != THOUGHT:
            raise DomainError(f"unknown event kind {ev.kind!r}")


def trace_actions(events: AgentTrace) -> list[AgentEvent]:
    return [ev for ev in events if ev.kind == ACTION]


# ---------------------------------------------------------------------------
# Tool contracts
# ---------------------------------------------------------------------------

INPUT_KINDS = ("string", "number", "integer", "flag")


@dataclass(frozen=True)
class ToolInput:
    name: str
    kind: str
    required: bool = True

    def __post_init__(self) -> None:
        if self.kind not in INPUT_KINDS:
            raise DomainError(f"unknown input kind {self.kind!r}")


@dataclass(frozen=True)
class ToolSpec:
    """Callable contract of one registry tool."""

    tool_id: str
    action_name: str
    description: str
    inputs: tuple[ToolInput, ...]
    output_doc: str

    def __post_init__(self) -> None:
        if not ACTION_NAME_RE.match(self.action_name):
            raise DomainError(f"invalid action name {self.action_name!r}")

    def rendered_description(self) -> str:
        args = ", ".join(
            f"{inp.name} ({inp.kind}{'' if inp.required else ', optional'})"
            for inp in self.inputs
        )
        if args:
            return f"{self.description} Args: {args}"
        return f"{self.description} Args: none"


# ---------------------------------------------------------------------------
# Benchmark queries and validators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArtifactCheck:
    filename_regex: str
    must_exist: bool = True


@dataclass(frozen=True)
class ValidatorSpec:
    """Programmatic answer check for one benchmark query.

    ``required_substrings`` entries starting with ``$`` are symbolic fixture
    references (see :mod:`opsbench.harness`). ``tool_order`` pairs are partial
    ordering constraints on first tool use.
    """

    required_substrings: tuple[str, ...] = ()
    answer_regex: str | None = None
    required_tools: frozenset[str] = frozenset()
    tool_order: tuple[tuple[str, str], ...] = ()
    artifact_checks: tuple[ArtifactCheck, ...] = ()
    expect_failure: bool = False

    def __post_init__(self) -> None:
        has_check = (
            self.required_substrings
            or self.answer_regex
            or self.required_tools
            or self.artifact_checks
        )
        if not has_check and not self.expect_failure:
            raise DomainError("validator must carry at least one check")
        for tid in self.required_tools:
            if tid not in TOOL_IDS:
                raise DomainError(f"unknown tool id {tid!r}")


@dataclass(frozen=True)
class QueryCase:
    """One benchmark query with its category, expected tools and validator."""

    id: str
    category: Category
    expected_tools: frozenset[str]
    text: str
    validator: ValidatorSpec

    def __post_init__(self) -> None:
        for tid in self.expected_tools:
            if tid not in TOOL_IDS:
                raise DomainError(f"{self.id}: unknown tool id {tid!r}")
        if self.category is Category.AR and len(self.expected_tools) < 2:
            raise DomainError(f"{self.id}: AR queries need at least two tools")
        if self.category is Category.SR and len(self.expected_tools) > 1:
            raise DomainError(f"{self.id}: SR queries use at most one tool")
        if not self.text:
            raise DomainError(f"{self.id}: empty query text")


# ---------------------------------------------------------------------------
# Measurements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunRecord:
    """One (backend, query, repetition) measurement."""

    backend_id: str
    query_id: str
    repetition: int
    wall_seconds: float
    prompt_tokens: int
    completion_tokens: int
    success: bool
    failure_kind: FailureKind
    trace: AgentTrace
    # True when the outcome matched the validator's expectation (an expected
    # failure counts); accuracy always scores raw success.
    expected: bool = True

    def __post_init__(self) -> None:
        if self.repetition < 1:
            raise DomainError("repetition must be >= 1")
        if self.wall_seconds < 0:
            raise DomainError("wall_seconds must be nonnegative")
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise DomainError("token counts must be nonnegative")
        if self.success != (self.failure_kind is FailureKind.NONE):
            raise DomainError("success must mean failure_kind == none")

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


@dataclass(frozen=True)
class ReportCell:
    accuracy_pct: float
    p50_s: float
    p90_s: float
    max_s: float
    avg_tokens: float
    repetitions: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.accuracy_pct <= 100.0:
            raise DomainError("accuracy_pct out of range")
        if not self.p50_s <= self.p90_s <= self.max_s:
            raise DomainError("percentiles must be ordered p50 <= p90 <= max")


@dataclass(frozen=True)
class BenchmarkReport:
    """Per-query, per-backend aggregates plus per-category rollups."""

    backend_ids: tuple[str, ...]
    query_ids: tuple[str, ...]
    cells: dict[tuple[str, str], ReportCell]  # (query_id, backend_id) -> cell
    rollups: dict[tuple[str, str], ReportCell]  # (category, backend_id) -> cell


# ---------------------------------------------------------------------------
# Cluster fixtures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PortInfo:
    port: int
    name: str | None
    protocol: str

    def __post_init__(self) -> None:
        if not 1 <= self.port <= 65535:
            raise DomainError(f"port {self.port} out of range")
        if self.protocol not in PORT_PROTOCOLS:
            raise DomainError(f"unknown protocol {self.protocol!r}")


@dataclass(frozen=True)
class ServiceInfo:
    name: str
    ports: tuple[PortInfo, ...]
    route: str = "unavailable"


@dataclass(frozen=True)
class PodInfo:
    name: str
    phase: str
    service_refs: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.phase not in POD_PHASES:
            raise DomainError(f"unknown pod phase {self.phase!r}")


@dataclass(frozen=True)
class OperatorInfo:
    name: str
    version: str
    status: str


@dataclass(frozen=True)
class CounterGeneratorSpec:
    """Deterministic counter series generator (seeded jitter on the rate)."""

    start_ts: float
    end_ts: float
    step_s: float
    rate_per_s: float
    jitter_seed: int

    def __post_init__(self) -> None:
        if self.step_s <= 0:
            raise DomainError("generator step_s must be positive")
        if self.end_ts < self.start_ts:
            raise DomainError("generator end_ts before start_ts")
        if self.rate_per_s < 0:
            raise DomainError("generator rate_per_s must be nonnegative")


@dataclass(frozen=True)
class MetricSeriesSpec:
    metric_name: str
    labels: tuple[tuple[str, str], ...]
    samples: tuple[tuple[float, float], ...] | None = None
    generator: CounterGeneratorSpec | None = None

    def __post_init__(self) -> None:
        if (self.samples is None) == (self.generator is None):
            raise DomainError(
                f"metric {self.metric_name!r} needs exactly one of samples/generator"
            )
        if self.samples is not None:
            ts = [t for t, _ in self.samples]
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise DomainError(
                    f"metric {self.metric_name!r} timestamps must strictly increase"
                )

    def label(self, name: str) -> str | None:
        for key, value in self.labels:
            if key == name:
                return value
        return None


@dataclass(frozen=True)
class Namespace:
    name: str
    operators: tuple[OperatorInfo, ...] = ()
    pods: tuple[PodInfo, ...] = ()
    services: tuple[ServiceInfo, ...] = ()
    metrics: tuple[MetricSeriesSpec, ...] = ()


@dataclass(frozen=True)
class ClusterFixture:
    """Declarative snapshot of the simulated cluster."""

    namespaces: tuple[Namespace, ...] = field(default_factory=tuple)

    def namespace(self, name: str) -> Namespace | None:
        for ns in self.namespaces:
            if ns.name == name:
                return ns
        return None
