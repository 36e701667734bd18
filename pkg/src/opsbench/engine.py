"""The ReAct loop: prompt assembly, step parsing, tool dispatch, termination.

The prompt template is a versioned resource substituted verbatim; the parser
is line-anchored and never raises on model output (malformed completions are
values, handled with one corrective re-ask).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from typing import Callable, Protocol

from .backends import BackendError, CompletionRequest, CompletionResponse
from .domain import (
    ACTION,
    AgentEvent,
    AgentTrace,
    DomainError,
    FINAL,
    OBSERVATION,
    THOUGHT,
    validate_trace,
)
from .toolkit import ToolRegistry, dispatch, render_registry

PROMPT_TEMPLATE = (
    importlib_resources.files("opsbench.resources")
    .joinpath("react_prompt.txt")
    .read_text(encoding="utf-8")
)

STOP_SEQUENCE = "Observation:"

CORRECTIVE_OBSERVATION = (
    "invalid format; follow the Thought/Action/Action Input format or give a "
    "Final Answer."
)

OUTCOME_FINISHED = "finished"
OUTCOME_MAX_ITERATIONS = "max_iterations"
OUTCOME_TIMEOUT = "timeout"
OUTCOME_PARSE_FAILURE = "parse_failure"
OUTCOME_BACKEND_ERROR = "backend_error"


class CompletionBackend(Protocol):
    backend_id: str

    def complete(self, request: CompletionRequest) -> CompletionResponse: ...


@dataclass(frozen=True)
class AgentLimits:
    max_iterations: int = 15
    max_output_chars: int = 32768
    wall_timeout_s: float = 180.0
    malformed_retry_budget: int = 1

    def __post_init__(self) -> None:
        if min(self.max_iterations, self.max_output_chars) <= 0:
            raise DomainError("limits must be positive")
        if self.wall_timeout_s <= 0 or self.malformed_retry_budget <= 0:
            raise DomainError("limits must be positive")


@dataclass(frozen=True)
class MemoryPolicy:
    enabled: bool = False
    max_turns: int = 8


# ---------------------------------------------------------------------------
# Prompt assembly
# ---------------------------------------------------------------------------


def build_prompt(
    registry_render: dict[str, str],
    question: str,
    scratchpad_text: str = "",
    memory_text: str = "",
) -> str:
    """Substitute the template placeholders; memory goes right before Begin!."""
    if not question:
        raise DomainError("question must be nonempty")
    prompt = PROMPT_TEMPLATE
    prompt = prompt.replace("{tools}", registry_render["tools_block"])
    prompt = prompt.replace("{tool_names}", registry_render["tool_names_block"])
    if memory_text:
        prompt = prompt.replace("Begin!", memory_text + "Begin!", 1)
    prompt = prompt.replace("{input}", question)
    prompt = prompt.replace("{agent_scratchpad}", scratchpad_text)
    return prompt


def render_memory(turns: list[tuple[str, str]], policy: MemoryPolicy) -> str:
    """Prior Question/Final Answer pairs for the prompt; empty when disabled."""
    if not policy.enabled or not turns:
        return ""
    kept = turns[-policy.max_turns :]
    return "".join(f"Question: {q}\nFinal Answer: {a}\n\n" for q, a in kept)


# ---------------------------------------------------------------------------
# Step parsing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParsedStep:
    kind: str  # "tool_call" | "finish" | "malformed"
    thought: str = ""
    action_name: str = ""
    input_text: str = ""
    final_answer: str = ""
    raw: str = ""
    reason: str = ""


def _strip_thought_label(text: str) -> str:
    stripped = text.strip()
    if stripped.startswith("Thought:"):
        stripped = stripped[len("Thought:") :].strip()
    return stripped


def parse_step(completion_text: str) -> ParsedStep:
    """Classify one completion as a tool call, a finish, or malformed.

    The first ``Final Answer:`` marker wins if it appears before any
    ``Action:`` line; otherwise an ``Action:`` line followed by an
    ``Action Input:`` line is required. Never raises.
    """
    lines = completion_text.split("\n")
    final_idx = None
    action_idx = None
    for i, line in enumerate(lines):
        stripped = line.lstrip()
        if final_idx is None and stripped.startswith("Final Answer:"):
            final_idx = i
        if action_idx is None and stripped.startswith("Action:"):
            action_idx = i

    if final_idx is not None and (action_idx is None or final_idx < action_idx):
        first = lines[final_idx].lstrip()[len("Final Answer:") :]
        answer = "\n".join([first] + lines[final_idx + 1 :]).strip()
        thought = _strip_thought_label("\n".join(lines[:final_idx]))
        return ParsedStep(kind="finish", thought=thought, final_answer=answer,
                          raw=completion_text)

    if action_idx is None:
        return ParsedStep(
            kind="malformed",
            raw=completion_text,
            reason="no Action or Final Answer marker",
        )

    action_name = lines[action_idx].lstrip()[len("Action:") :].strip()
    if not action_name:
        return ParsedStep(kind="malformed", raw=completion_text, reason="empty action name")

    input_idx = None
    for i in range(action_idx + 1, len(lines)):
        if lines[i].lstrip().startswith("Action Input:"):
            input_idx = i
            break
    if input_idx is None:
        return ParsedStep(
            kind="malformed",
            raw=completion_text,
            reason="Action line without Action Input",
        )

    input_lines = [lines[input_idx].lstrip()[len("Action Input:") :]]
    for line in lines[input_idx + 1 :]:
        if not line.strip():
            break
        input_lines.append(line)
    thought = _strip_thought_label("\n".join(lines[:action_idx]))
    return ParsedStep(
        kind="tool_call",
        thought=thought,
        action_name=action_name,
        input_text="\n".join(input_lines).strip(),
        raw=completion_text,
    )


def render_scratchpad(trace: AgentTrace) -> str:
    """Serialize trace events back into prompt-transcript blocks."""
    validate_trace(trace)
    parts: list[str] = []
    pending_thought: str | None = None
    for ev in trace:
        if ev.kind == THOUGHT:
            pending_thought = ev.text
        elif ev.kind == ACTION:
            parts.append(
                f"Thought: {pending_thought or ''}\n"
                f"Action: {ev.action_name}\n"
                f"Action Input: {ev.input_text}\n"
            )
            pending_thought = None
        elif ev.kind == OBSERVATION:
            if pending_thought is not None:
                parts.append(f"Thought: {pending_thought}\n")
                pending_thought = None
            parts.append(f"Observation: {ev.text}\n")
        elif ev.kind == FINAL:
            if pending_thought is not None:
                parts.append(f"Thought: {pending_thought}\n")
                pending_thought = None
            parts.append(f"Final Answer: {ev.text}\n")
    if pending_thought is not None:
        parts.append(f"Thought: {pending_thought}\n")
    return "".join(parts)


def _scratchpad_for_prompt(trace: AgentTrace) -> str:
    # The template already ends with "Thought:", so the transcript drops the
    # first label and re-appends a trailing "Thought:" cue for the next step.
    if not trace:
        return ""
    rendered = render_scratchpad(trace)
    if rendered.startswith("Thought:"):
        rendered = rendered[len("Thought:") :]
    return rendered + "Thought:"


def _apply_stop(text: str) -> str:
    # Defensive client-side trim: a model must never fabricate observations.
    if text.startswith(STOP_SEQUENCE):
        return ""
    idx = text.find("\n" + STOP_SEQUENCE)
    if idx >= 0:
        return text[:idx]
    return text


# ---------------------------------------------------------------------------
# The loop
# ---------------------------------------------------------------------------


@dataclass
class AgentRunResult:
    final_answer: str | None
    trace: AgentTrace
    prompt_tokens: int
    completion_tokens: int
    outcome: str
    truncated: bool = False
    raw_completions: list[str] = field(default_factory=list)

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


def run_agent(
    backend: CompletionBackend,
    registry: ToolRegistry,
    question: str,
    limits: AgentLimits | None = None,
    memory_policy: MemoryPolicy | None = None,
    memory_turns: list[tuple[str, str]] | None = None,
    on_event: Callable[[AgentEvent], None] | None = None,
) -> AgentRunResult:
    """Drive the ReAct loop until Final Answer, an iteration cap, or a timeout."""
    if not registry.tools:
        raise DomainError("registry must not be empty")
    limits = limits or AgentLimits()
    memory_policy = memory_policy or MemoryPolicy()
    registry_render = render_registry(registry.specs())
    memory_text = render_memory(memory_turns or [], memory_policy)

    events: list[AgentEvent] = []
    raw_completions: list[str] = []
    prompt_tokens = 0
    completion_tokens = 0
    truncated = False
    retries_left = limits.malformed_retry_budget
    started = time.perf_counter()

    def emit(ev: AgentEvent) -> None:
        events.append(ev)
        if on_event is not None:
            on_event(ev)

    def result(outcome: str, answer: str | None = None) -> AgentRunResult:
        return AgentRunResult(
            final_answer=answer,
            trace=tuple(events),
            prompt_tokens=prompt_tokens,
            completion_tokens=completion_tokens,
            outcome=outcome,
            truncated=truncated,
            raw_completions=raw_completions,
        )

    for _ in range(limits.max_iterations):
        if time.perf_counter() - started > limits.wall_timeout_s:
            return result(OUTCOME_TIMEOUT)
        prompt = build_prompt(
            registry_render, question, _scratchpad_for_prompt(tuple(events)), memory_text
        )
        request = CompletionRequest(
            prompt=prompt,
            stop_sequences=(STOP_SEQUENCE,),
            max_output_chars=limits.max_output_chars,
        )
        try:
            response = backend.complete(request)
        except BackendError:
            return result(OUTCOME_BACKEND_ERROR)
        prompt_tokens += response.prompt_tokens
        completion_tokens += response.completion_tokens
        text = _apply_stop(response.text)
        if len(text) >= limits.max_output_chars:
            text = text[: limits.max_output_chars]
            truncated = True
        raw_completions.append(text)
        if time.perf_counter() - started > limits.wall_timeout_s:
            return result(OUTCOME_TIMEOUT)

        step = parse_step(text)
        if step.kind == "finish":
            if step.thought:
                emit(AgentEvent.thought(step.thought))
            emit(AgentEvent.final(step.final_answer))
            return result(OUTCOME_FINISHED, step.final_answer)
        if step.kind == "tool_call":
            emit(AgentEvent.thought(step.thought))
            emit(AgentEvent.action(step.action_name, step.input_text))
            tool_result = dispatch(registry, step.action_name, step.input_text)
            emit(AgentEvent.observation(tool_result.content))
            continue
        # Malformed: record the raw completion, re-ask once per budget.
        emit(AgentEvent.thought(step.raw))
        if retries_left <= 0:
            return result(OUTCOME_PARSE_FAILURE)
        retries_left -= 1
        emit(AgentEvent.observation(CORRECTIVE_OBSERVATION))
    return result(OUTCOME_MAX_ITERATIONS)
