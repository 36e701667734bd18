"""Deterministic scripted backends: golden policies and fault injectors.

A scripted backend is a pure function of the prompt text: the active query is
recognized from the Question line and the step index from the number of
observations already in the transcript, so no state survives between calls
and identical prompts always get identical completions.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import yaml

from .backends import CompletionRequest, CompletionResponse, approximated_response
from .suite import builtin_suite
from .toolkit import ACTION_NAMES

FAULT_KINDS = ("hallucinate_dates", "deflect", "flawed_order", "truncate", "stall")

# Targets mirror the failure discussion: the plot workflow for the first three
# fault kinds, the CSV workflow for truncation.
FAULT_TARGETS = {
    "hallucinate_dates": "Q-24",
    "deflect": "Q-24",
    "flawed_order": "Q-24",
    "truncate": "Q-25",
    "stall": "Q-01",
}

# The recorded range start replayed by the golden plot workflow. A pinned
# clock reproduces the recorded end timestamp but not this one (the original
# run's clock advanced between the two time-tool calls), so the script keeps
# the recorded value to regenerate the same artifact name.
RECORDED_PLOT_RANGE_START = 1730327770.333979

_FALLBACK_ANSWER = (
    "I do not know how to help with that question using the tools I have."
)


# ---------------------------------------------------------------------------
# Prompt reading
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PromptView:
    question: str
    actions: tuple[tuple[str, str], ...]
    observations: tuple[str, ...]
    prelude: str  # everything before Begin! (tool list + any memory turns)

    @property
    def step_index(self) -> int:
        return len(self.observations)

    def observation(self, index: int) -> str:
        if 0 <= index < len(self.observations):
            return self.observations[index]
        return ""


def read_prompt(prompt: str) -> PromptView:
    """Extract the question and the transcript from an assembled prompt."""
    prelude, _, tail = prompt.partition("\nBegin!\n")
    lines = tail.split("\n")
    question = ""
    q_idx = -1
    for i, line in enumerate(lines):
        if line.startswith("Question: "):
            question = line[len("Question: ") :]
            q_idx = i
    actions: list[tuple[str, str]] = []
    observations: list[str] = []
    pending_action: str | None = None
    obs_lines: list[str] | None = None
    for line in lines[q_idx + 1 :]:
        if line.startswith("Thought:") or line.startswith("Action: "):
            if obs_lines is not None:
                observations.append("\n".join(obs_lines))
                obs_lines = None
        if line.startswith("Action: "):
            pending_action = line[len("Action: ") :].strip()
        elif line.startswith("Action Input:") and pending_action is not None:
            actions.append((pending_action, line[len("Action Input:") :].strip()))
            pending_action = None
        elif line.startswith("Observation: "):
            obs_lines = [line[len("Observation: ") :]]
        elif obs_lines is not None:
            obs_lines.append(line)
    if obs_lines is not None:
        observations.append("\n".join(obs_lines))
    return PromptView(
        question=question,
        actions=tuple(actions),
        observations=tuple(observations),
        prelude=prelude,
    )


def _tool_call(thought: str, tool_id: str, payload: dict | str) -> str:
    body = payload if isinstance(payload, str) else json.dumps(payload)
    return f"Thought: {thought}\nAction: {ACTION_NAMES[tool_id]}\nAction Input: {body}"


def _finish(answer: str, thought: str = "I now know the final answer") -> str:
    return f"Thought: {thought}\nFinal Answer: {answer}"


# Observation field extraction ------------------------------------------------

_TS_RE = re.compile(r"timestamp = ([0-9][0-9.]*)")
_ISO_RE = re.compile(r"date_time_iso_format_string = '([^']+)'")
_FILE_RE = re.compile(r"file_name='([^']+)'")
_NAMES_RE = re.compile(r"metric_names = \[([^\]]*)\]")
_POINT_RE = re.compile(r"MetricPoint \(timestamp = ([0-9.]+), value = ([0-9.eE+-]+)\)")
_OPERATOR_RE = re.compile(
    r"OperatorInfo \(name = '([^']*)', version = '([^']*)', status = '([^']*)'\)"
)
_PROM_SVC_RE = re.compile(
    r"ServiceInfo \(name = '([^']*prometheus[^']*)', ports = \[PortInfo \(port = (\d+)"
)


def _parse_timestamp(obs: str) -> float:
    m = _TS_RE.search(obs)
    return float(m.group(1)) if m else 0.0


def _parse_iso(obs: str) -> str:
    m = _ISO_RE.search(obs)
    return m.group(1) if m else ""


def _parse_prometheus_service(obs: str) -> tuple[str, int]:
    m = _PROM_SVC_RE.search(obs)
    if m:
        return m.group(1), int(m.group(2))
    return "prometheus-operated", 9090


def _parse_metric_names(obs: str) -> list[str]:
    m = _NAMES_RE.search(obs)
    if not m:
        return []
    return re.findall(r"'([^']+)'", m.group(1))


def _parse_points(obs: str) -> list[tuple[float, float]]:
    return [(float(t), float(v)) for t, v in _POINT_RE.findall(obs)]


def _points_as_csv(points: list[tuple[float, float]]) -> str:
    from .toolkit import render_samples_csv

    return render_samples_csv(points)


# ---------------------------------------------------------------------------
# Golden flows
# ---------------------------------------------------------------------------


def _time_now_call(thought: str) -> str:
    return _tool_call(
        thought, "T3", {"time_value": "now", "time_metric": "seconds", "ago_flag": 0}
    )


def _golden_tool_listing(view: PromptView, with_descriptions: bool) -> str:
    block = view.prelude.partition("You have access to the following tools:\n\n")[2]
    block = block.partition("\n\nUse the following format:")[0]
    lines = [line for line in block.split("\n") if line.strip()]
    if with_descriptions:
        listing = "\n".join(f"- {line}" for line in lines)
        return _finish(f"I have access to the following tools:\n{listing}")
    names = [line.split(":", 1)[0] for line in lines]
    return _finish("I have access to the following tools: " + ", ".join(names) + ".")


def _plot_flow(view: PromptView) -> str:
    step = view.step_index
    if step == 0:
        return _tool_call(
            "I need the Prometheus service name and port in namespace demo first.",
            "T6",
            {"namespace": "demo"},
        )
    if step == 1:
        return _time_now_call(
            "The Prometheus service is identified. Now I need the current time "
            "to define the end of the range."
        )
    if step == 2:
        return _tool_call(
            "Now I need the timestamp for the start of the range.",
            "T3",
            {"time_value": 48, "time_metric": "hours", "ago_flag": 1},
        )
    if step == 3:
        service, port = _parse_prometheus_service(view.observation(0))
        end_ts = _parse_timestamp(view.observation(1))
        return _tool_call(
            "With both timestamps I can plot the metric data.",
            "T9",
            {
                "prom_service": service,
                "prom_namespace": "demo",
                "prom_port": port,
                "metric_name": "load_generator_total_msg",
                "metric_range_start": RECORDED_PLOT_RANGE_START,
                "metric_range_end": end_ts,
            },
        )
    m = _FILE_RE.search(view.observation(3))
    return _finish(m.group(1) if m else "no file was produced")


def _csv_flow(view: PromptView) -> str:
    step = view.step_index
    if step == 0:
        return _tool_call(
            "I need the Prometheus service name and port in namespace demo first.",
            "T6",
            {"namespace": "demo"},
        )
    if step == 1:
        return _time_now_call("Next I need the current time as the end of the range.")
    if step == 2:
        return _tool_call(
            "Now I need the timestamp for 40 days ago as the start of the range.",
            "T3",
            {"time_value": 40, "time_metric": "days", "ago_flag": 1},
        )
    if step == 3:
        service, port = _parse_prometheus_service(view.observation(0))
        return _tool_call(
            "With both timestamps I can fetch the metric data.",
            "T8",
            {
                "prom_service": service,
                "prom_namespace": "demo",
                "prom_port": port,
                "metric_name": "load_generator_total_msg",
                "metric_range_start": _parse_timestamp(view.observation(2)),
                "metric_range_end": _parse_timestamp(view.observation(1)),
            },
        )
    points = _parse_points(view.observation(3))
    if not points:
        return _finish("no data was returned for the requested range")
    return _finish(_points_as_csv(points))


def _metric_listing_flow(view: PromptView, only_prefix: str | None) -> str:
    step = view.step_index
    if step == 0:
        return _tool_call(
            "First I find the Prometheus service name and port in namespace demo.",
            "T6",
            {"namespace": "demo"},
        )
    if step == 1:
        return _tool_call(
            "Now I can list the metric names filtered by namespace demo.",
            "T7",
            {"filter_name": "namespace", "filter_value": "demo"},
        )
    service, port = _parse_prometheus_service(view.observation(0))
    names = _parse_metric_names(view.observation(1))
    if only_prefix is not None:
        names = [n for n in names if n.startswith(only_prefix)]
    return _finish(
        f"The Prometheus service is {service} on port {port}. "
        "The stored metrics are: " + ", ".join(names) + "."
    )


def _time_flow(view: PromptView, payload: dict, render) -> str:
    if view.step_index == 0:
        return _tool_call("I should use the time tool for this.", "T3", payload)
    obs = view.observation(0)
    return _finish(render(_parse_timestamp(obs), _parse_iso(obs)))


_NOW_PAYLOAD = {"time_value": "now", "time_metric": "seconds", "ago_flag": 0}
_AGO_3H = {"time_value": 3, "time_metric": "hours", "ago_flag": 1}
_AHEAD_3H = {"time_value": 3, "time_metric": "hours", "ago_flag": 0}


def _render_today(_ts: float, iso: str) -> str:
    day = iso.split("T")[0]
    weekday = date.fromisoformat(day).strftime("%A") if day else "unknown"
    return f"Today is {weekday}, {day}."


def _golden_completion(query_id: str, view: PromptView) -> str:
    step = view.step_index
    if query_id == "Q-01":
        return _finish(
            "Hi! I am an AI operations assistant for Kubernetes and OpenShift "
            "environments. I can inspect namespaces, query Prometheus metrics, "
            "search the platform documentation, and run capacity planning "
            "searches using my tools."
        )
    if query_id == "Q-02" or query_id == "Q-03":
        return _golden_tool_listing(view, with_descriptions=False)
    if query_id == "Q-04":
        return _golden_tool_listing(view, with_descriptions=True)
    if query_id in ("Q-05", "Q-06"):
        if step == 0:
            return _tool_call(
                "I should list the operators in namespace demo.",
                "T4",
                {"namespace": "demo"},
            )
        operators = _OPERATOR_RE.findall(view.observation(0))
        if query_id == "Q-05":
            listing = ", ".join(
                f"{n} (version {v}, status {s})" for n, v, s in operators
            )
            return _finish(f"Namespace demo has the following operators: {listing}.")
        listing = ", ".join(f"{n} version {v}" for n, v, _ in operators)
        return _finish(f"Operators in namespace demo: {listing}.")
    if query_id == "Q-07":
        if step == 0:
            return _tool_call(
                "The documentation search tool should know this procedure.",
                "T2",
                {"query": view.question},
            )
        return _finish(
            "You can create a Data Science Project from the OpenShift AI "
            "dashboard: select Data Science Projects in the navigation menu, "
            "click Create data science project, enter a project name (and "
            "optionally a description), then click Create. The new project "
            "appears in the project list, where you can add workbenches, "
            "cluster storage, and data connections."
        )
    if query_id == "Q-08":
        return _finish(
            "Paris is the capital of France, set on the banks of the river "
            "Seine. It is a global center of art, fashion, gastronomy, and "
            "culture, famous for landmarks such as the Eiffel Tower, the "
            "Louvre, and Notre-Dame. Greater Paris is home to roughly twelve "
            "million people and hosts Europe's densest metro network."
        )
    if query_id == "Q-09":
        if "Seine" in view.prelude:
            return _finish(
                "Yes. Based on our earlier exchange about Paris, the river you "
                "are asking about is the Seine."
            )
        return _finish(
            "I do not have enough context to answer: please tell me which city "
            "or location you are asking about.",
            thought="The question lacks context and no earlier conversation is available",
        )
    if query_id in ("Q-10", "Q-11", "Q-12", "Q-13"):
        if step == 0:
            return _tool_call(
                "I should summarize the pods in namespace demo.",
                "T5",
                {"namespace": "demo"},
            )
        return _finish(f"Here is the pod summary for namespace demo: {view.observation(0)}")
    if query_id == "Q-14":
        return _time_flow(view, _NOW_PAYLOAD, _render_today)
    if query_id == "Q-15":
        return _time_flow(
            view, _NOW_PAYLOAD, lambda ts, iso: f"The current date time is {iso}."
        )
    if query_id == "Q-16":
        return _time_flow(
            view, _NOW_PAYLOAD, lambda ts, iso: f"The current timestamp is {ts!r}."
        )
    if query_id in ("Q-17", "Q-19"):
        return _time_flow(
            view,
            _AGO_3H,
            lambda ts, iso: (
                f"The timestamp for 3 hours ago is {ts!r} and the date time is {iso}."
            ),
        )
    if query_id == "Q-18":
        return _time_flow(
            view,
            _AHEAD_3H,
            lambda ts, iso: (
                f"The timestamp for 3 hours from now is {ts!r} and the date time is {iso}."
            ),
        )
    if query_id == "Q-20":
        if step == 0:
            return _tool_call(
                "I should check the services in namespace demo.",
                "T6",
                {"namespace": "demo"},
            )
        obs = view.observation(0)
        service, _ = _parse_prometheus_service(obs)
        m = re.search(
            r"ServiceInfo \(name = '" + re.escape(service) + r"', ports = \[([^\]]*)\]",
            obs,
        )
        ports = re.findall(r"port = (\d+), name = '([^']*)'", m.group(1)) if m else []
        listing = ", ".join(f"{p} ({n})" for p, n in ports)
        return _finish(
            f"Yes, there is a Prometheus service running in namespace demo: "
            f"{service} with port values {listing}."
        )
    if query_id == "Q-21":
        return _metric_listing_flow(view, only_prefix=None)
    if query_id == "Q-22":
        return _metric_listing_flow(view, only_prefix="load_generator")
    if query_id == "Q-23":
        if step == 0:
            return _tool_call(
                "The capacity planning search tool can find such a configuration.",
                "T1",
                {"target_kpi": 307, "precision_pct": 2.9, "epochs": 100},
            )
        return _finish(
            "The following WireMock configuration supports the requested "
            f"throughput KPI: {view.observation(0)}"
        )
    if query_id == "Q-24":
        return _plot_flow(view)
    if query_id == "Q-25":
        return _csv_flow(view)
    return _finish(_FALLBACK_ANSWER)


# ---------------------------------------------------------------------------
# Fault flows
# ---------------------------------------------------------------------------


def _fault_completion(kind: str, view: PromptView) -> str:
    step = view.step_index
    if kind == "hallucinate_dates":
        if step == 0:
            return _tool_call(
                "I need the Prometheus service in namespace demo.",
                "T6",
                {"namespace": "demo"},
            )
        if step == 1:
            service, port = _parse_prometheus_service(view.observation(0))
            # Makes the date range up instead of consulting the time tool.
            return _tool_call(
                "The range is the last 48 hours, which I already know.",
                "T9",
                {
                    "prom_service": service,
                    "prom_namespace": "demo",
                    "prom_port": port,
                    "metric_name": "load_generator_total_msg",
                    "metric_range_start": 1730241600.0,
                    "metric_range_end": 1730414400.0,
                },
            )
        m = _FILE_RE.search(view.observation(1))
        return _finish(m.group(1) if m else "FILE-plot-load_generator_total_msg-1730241600-1730414400.png")
    if kind == "deflect":
        return _finish(
            "To plot this metric you can port-forward the Prometheus service "
            "in namespace demo yourself, open the graph console in a browser, "
            "and export the chart for load_generator_total_msg from there.",
            thought="The user can do this on their own",
        )
    if kind == "flawed_order":
        if step == 0:
            return _tool_call(
                "I will plot the data right away.",
                "T9",
                {
                    "prom_service": "prometheus",
                    "prom_namespace": "demo",
                    "prom_port": 9090,
                    "metric_name": "load_generator_total_msg",
                    "metric_range_start": "start",
                    "metric_range_end": "end",
                },
            )
        if step == 1:
            return _time_now_call("The plot failed. Maybe I need the time first.")
        if step == 2:
            return _tool_call(
                "I still need the start of the range.",
                "T3",
                {"time_value": 48, "time_metric": "hours", "ago_flag": 1},
            )
        if step == 3:
            return _tool_call(
                "Maybe the services hold the answer.",
                "T6",
                {"namespace": "demo"},
            )
        return _finish(
            "I could not find the relevant information to create the plot.",
            thought="The workflow did not come together",
        )
    if kind == "truncate":
        # Worked the data out but dumps an endless table with no terminating
        # marker, blowing through the output budget.
        if step <= 3:
            return _csv_flow(view)
        points = _parse_points(view.observation(3)) or [(1730000000.0, 1.0)]
        rows = ["Thought: I have the data and will print the complete table now",
                "timestamp,value"]
        size = sum(len(r) + 1 for r in rows)
        i = 0
        while size < 40000:
            t, v = points[i % len(points)]
            row = f"{int(t) + (i // len(points))},{v}"
            rows.append(row)
            size += len(row) + 1
            i += 1
        return "\n".join(rows)
    if kind == "stall":
        time.sleep(0.2)
        return _finish("finally done")
    raise ValueError(f"unknown fault kind {kind!r}")


# ---------------------------------------------------------------------------
# Policies and the scripted backend
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScriptedPolicy:
    policy_id: str
    behavior: str  # "golden" | "replay" | "fault"
    fault_kind: str = ""
    completions: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.behavior not in ("golden", "replay", "fault"):
            raise ValueError(f"unknown behavior {self.behavior!r}")
        if self.behavior == "fault" and self.fault_kind not in FAULT_KINDS:
            raise ValueError(f"unknown fault kind {self.fault_kind!r}")
        if self.behavior == "replay" and not self.completions:
            raise ValueError("replay policy needs at least one completion")

    def completion_for(self, query_id: str, view: PromptView) -> str:
        if self.behavior == "golden":
            return _golden_completion(query_id, view)
        if self.behavior == "fault":
            return _fault_completion(self.fault_kind, view)
        index = min(view.step_index, len(self.completions) - 1)
        return self.completions[index]


GOLDEN_POLICY = ScriptedPolicy(policy_id="golden", behavior="golden")


@dataclass
class ScriptedBackend:
    """Completion backend driven by per-query scripted policies."""

    backend_id: str = "scripted:golden"
    policies: dict[str, ScriptedPolicy] = field(default_factory=dict)
    default_policy: ScriptedPolicy = GOLDEN_POLICY
    _text_to_id: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self._text_to_id:
            self._text_to_id = {case.text: case.id for case in builtin_suite()}

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        view = read_prompt(request.prompt)
        query_id = self._text_to_id.get(view.question, "")
        policy = self.policies.get(query_id, self.default_policy)
        text = policy.completion_for(query_id, view)
        return approximated_response(request.prompt, text)


def golden_backend() -> ScriptedBackend:
    return ScriptedBackend(backend_id="scripted:golden")


def fault_backend(kind: str) -> ScriptedBackend:
    """Golden everywhere except the fault's target query."""
    if kind not in FAULT_KINDS:
        raise ValueError(f"unknown fault kind {kind!r}")
    target = FAULT_TARGETS[kind]
    policy = ScriptedPolicy(policy_id=f"fault:{kind}", behavior="fault", fault_kind=kind)
    return ScriptedBackend(
        backend_id=f"scripted:fault:{kind}",
        policies={target: policy},
    )


def load_policy_pack(text: str, backend_id: str = "scripted:pack") -> ScriptedBackend:
    """Build a scripted backend from a YAML policy pack.

    The pack maps query ids to behaviors; ``default`` sets the fallback:

    .. code-block:: yaml

        policies:
          Q-24: {behavior: fault, kind: hallucinate_dates}
          Q-01: {behavior: replay, completions: ["Final Answer: hello"]}
          default: {behavior: golden}
    """
    doc = yaml.safe_load(text) or {}
    entries = doc.get("policies", {})
    policies: dict[str, ScriptedPolicy] = {}
    default = GOLDEN_POLICY
    for key, raw in entries.items():
        policy = ScriptedPolicy(
            policy_id=str(key),
            behavior=str(raw.get("behavior", "golden")),
            fault_kind=str(raw.get("kind", "")),
            completions=tuple(str(c) for c in raw.get("completions", [])),
        )
        if key == "default":
            default = policy
        else:
            policies[str(key)] = policy
    return ScriptedBackend(
        backend_id=backend_id, policies=policies, default_policy=default
    )


def load_policy_pack_file(path: str | Path) -> ScriptedBackend:
    return load_policy_pack(
        Path(path).read_text(encoding="utf-8"),
        backend_id=f"scripted:pack:{Path(path).stem}",
    )
