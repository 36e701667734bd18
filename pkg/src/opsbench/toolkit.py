"""The nine operations tools behind uniform specs, plus the registry render.

Tool results are always delivered as observation text; a bad argument or an
empty query range produces an error observation the agent can read and
recover from, never an exception out of the loop.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable
from zoneinfo import ZoneInfo

from . import ragdocs
from .capacity import search_capacity_config
from .domain import DomainError, ToolInput, ToolSpec
from .ragdocs import DocChunk
from .simcluster import (
    Clock,
    SimState,
    irate_points,
    list_operators,
    metric_names,
    pod_summary,
    range_samples,
    service_summary,
)

METRIC_NAME_RE = re.compile(r"^[A-Za-z_:][A-Za-z0-9_:]*$")
PLOT_FILE_RE = re.compile(r"^FILE-plot-[A-Za-z0-9_:]+-[0-9]+-[0-9]+\.(png|svg)$")

_UNIT_SECONDS = {"seconds": 1.0, "minutes": 60.0, "hours": 3600.0, "days": 86400.0}

DEFAULT_SEED = 90521

ACTION_NAMES = {
    "T1": "Search_WireMock_configuration_for_target_KPI",
    "T2": "Search_OpenShift_AI_documentation",
    "T3": "Get_timestamp_and_time_ISO",
    "T4": "List_Operators_In_OpenShift_Namespace",
    "T5": "Summarize_Pods_In_OpenShift_Namespace",
    "T6": "Summarize_Services_Information_In_OpenShift_Namespace",
    "T7": "List_Prometheus_metric_names",
    "T8": "Get_Prometheus_metric_data_range",
    "T9": "File_create_plot_irate",
}


@dataclass(frozen=True)
class ToolResult:
    """What a tool hands back to the agent loop."""

    content: str
    ok: bool = True
    structured: object | None = None
    artifacts: tuple[str, ...] = ()


def _error(message: str) -> ToolResult:
    return ToolResult(content=f"ERROR: {message}", ok=False)


def format_number(value: float) -> str:
    """Shortest decimal rendering; integral floats drop the decimal point."""
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _quote(value: str | None) -> str:
    return f"'{value}'"


def _render_ports(ports) -> str:
    rendered = ", ".join(
        f"PortInfo (port = {p.port}, name = {_quote(p.name if p.name else 'No name available')}, "
        f"protocol = {_quote(p.protocol)})"
        for p in ports
    )
    return f"[{rendered}]"


# ---------------------------------------------------------------------------
# Tool implementations
# ---------------------------------------------------------------------------


def tool_time_info(payload: dict, clock: Clock) -> ToolResult:
    """Timestamp, ISO string and timezone for now or a relative offset."""
    raw_value = payload["time_value"]
    metric = str(payload["time_metric"])
    ago = payload["ago_flag"]
    if metric not in _UNIT_SECONDS:
        return _error(f"unknown time_metric {metric!r}")
    if isinstance(raw_value, str) and raw_value.strip().lower() == "now":
        offset = 0.0
    else:
        try:
            value = float(raw_value)
        except (TypeError, ValueError):
            return _error(f"time_value must be 'now' or a number, got {raw_value!r}")
        if value < 0:
            return _error("time_value must be nonnegative")
        offset = value * _UNIT_SECONDS[metric]
    base = clock.now()
    ts = base - offset if ago else base + offset
    tz = ZoneInfo(clock.tz_name)
    iso = datetime.fromtimestamp(ts, tz).isoformat(timespec="microseconds")
    content = (
        f"timestamp = {ts!r} date_time_iso_format_string = {_quote(iso)} "
        f"timezone = {_quote(clock.tz_name)}"
    )
    structured = {
        "timestamp": ts,
        "date_time_iso_format_string": iso,
        "timezone": clock.tz_name,
    }
    return ToolResult(content=content, structured=structured)


def tool_list_operators(payload: dict, state: SimState) -> ToolResult:
    ns = str(payload["namespace"])
    ops = list_operators(state, ns)
    rendered = ", ".join(
        f"OperatorInfo (name = {_quote(o.name)}, version = {_quote(o.version)}, "
        f"status = {_quote(o.status)})"
        for o in ops
    )
    return ToolResult(
        content=f"namespace = {_quote(ns)} operators = [{rendered}]",
        structured=ops,
    )


def tool_pod_summary(payload: dict, state: SimState) -> ToolResult:
    ns = str(payload["namespace"])
    summary = pod_summary(state, ns)
    counts = ", ".join(f"{k} = {v}" for k, v in summary.phase_counts.items())
    details = ", ".join(
        f"RunningPod (name = {_quote(d.name)}, service_name = {_quote(d.service_name)}, "
        f"ports = {_render_ports(d.ports)}, route = {_quote(d.route)})"
        for d in summary.running
    )
    content = (
        f"namespace = {_quote(ns)} pod_counts = ({counts}) "
        f"running_pods = [{details}]"
    )
    return ToolResult(content=content, structured=summary)


def tool_service_summary(payload: dict, state: SimState) -> ToolResult:
    ns = str(payload["namespace"])
    services = service_summary(state, ns)
    rendered = ", ".join(
        f"ServiceInfo (name = {_quote(s.name)}, ports = {_render_ports(s.ports)}, "
        f"route = {_quote(s.route)})"
        for s in services
    )
    return ToolResult(
        content=f"namespace = {_quote(ns)} svc_summary = [{rendered}]",
        structured=services,
    )


def tool_metric_names(payload: dict, state: SimState) -> ToolResult:
    name = str(payload["filter_name"])
    value = str(payload["filter_value"])
    if not name:
        return _error("filter_name must be nonempty")
    names = metric_names(state, name, value)
    rendered = ", ".join(_quote(n) for n in names)
    return ToolResult(content=f"metric_names = [{rendered}]", structured=names)


def _checked_range(payload: dict, state: SimState):
    metric = str(payload["metric_name"])
    start = float(payload["metric_range_start"])
    end = float(payload["metric_range_end"])
    if start > end:
        return None, _error("start must not exceed end")
    result = range_samples(state, metric, start, end)
    if not result.metric_found:
        return None, _error(f"no such metric {metric!r}")
    return (metric, start, end, result.samples), None


def tool_metric_range(payload: dict, state: SimState) -> ToolResult:
    checked, err = _checked_range(payload, state)
    if err:
        return err
    metric, _, _, samples = checked
    points = ", ".join(
        f"MetricPoint (timestamp = {t!r}, value = {format_number(v)})"
        for t, v in samples
    )
    content = f"metric_name = {_quote(metric)} metric_data = [{points}]"
    return ToolResult(content=content, structured=list(samples))


def render_samples_csv(samples) -> str:
    """CSV table with floored integer timestamps and shortest value renderings."""
    lines = ["timestamp,value"]
    lines.extend(f"{math.floor(t)},{format_number(v)}" for t, v in samples)
    return "\n".join(lines)


def tool_metric_csv(payload: dict, state: SimState) -> ToolResult:
    checked, err = _checked_range(payload, state)
    if err:
        return err
    _, _, _, samples = checked
    if not samples:
        return _error("no data in range")
    return ToolResult(content=render_samples_csv(samples), structured=list(samples))


def plot_filename(metric: str, start: float, end: float, fmt: str) -> str:
    return f"FILE-plot-{metric}-{math.floor(start)}-{math.floor(end)}.{fmt}"


def _render_plot(path, metric: str, points) -> None:
    # Imported lazily: matplotlib startup is slow and only the plot tool pays it.
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot([t for t, _ in points], [r for _, r in points])
    ax.set_xlabel("timestamp")
    ax.set_ylabel("irate")
    ax.set_title(metric)
    fig.savefig(path)
    plt.close(fig)


def tool_plot_irate(payload: dict, state: SimState, plot_format: str = "png") -> ToolResult:
    metric = str(payload["metric_name"])
    if not METRIC_NAME_RE.match(metric):
        return _error(f"invalid metric name {metric!r}")
    checked, err = _checked_range(payload, state)
    if err:
        return err
    _, start, end, samples = checked
    if not samples:
        return _error("no data in range")
    if len(samples) < 2:
        return _error("irate undefined for a single sample")
    points = irate_points(samples)
    name = plot_filename(metric, start, end, plot_format)
    _render_plot(state.artifact_dir / name, metric, points)
    return ToolResult(content=f"file_name={_quote(name)}", artifacts=(name,))


def tool_rag_search(payload: dict, corpus: list[DocChunk]) -> ToolResult:
    if not corpus:
        return _error("documentation corpus is empty")
    query = str(payload["query"])
    k = int(payload.get("k", 3))
    hits = ragdocs.search(query, corpus, k=max(1, k))
    parts = []
    if all(h.score == 0.0 for h in hits):
        parts.append("(low confidence: no term overlap with the documentation)")
    for hit in hits:
        parts.append(f"[{hit.chunk_id}] (score={hit.score:.4f})\n{hit.text}")
    return ToolResult(content="\n\n".join(parts), structured=hits)


def tool_mlasp_search(payload: dict, seed: int) -> ToolResult:
    try:
        target = float(payload["target_kpi"])
        precision = float(payload["precision_pct"])
        epochs = int(payload["epochs"])
        result = search_capacity_config(target, precision, epochs, seed)
    except (TypeError, ValueError) as exc:
        return _error(str(exc))
    cfg = result.config
    content = (
        f"config = CapacityConfig (async_response_threads = {cfg.async_response_threads}, "
        f"container_cpu = {cfg.container_cpu!r}, "
        f"container_memory_mb = {cfg.container_memory_mb}, "
        f"jvm_heap_mb = {cfg.jvm_heap_mb}) "
        f"predicted_kpi = {cfg.predicted_kpi!r} "
        f"within_precision = {result.within_precision} "
        f"epochs_used = {result.epochs_used}"
    )
    return ToolResult(content=content, structured=result)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tool:
    spec: ToolSpec
    run: Callable[[dict], ToolResult]


@dataclass
class ToolRegistry:
    tools: tuple[Tool, ...]
    by_action: dict[str, Tool] = field(default_factory=dict)
    by_id: dict[str, Tool] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for tool in self.tools:
            action = tool.spec.action_name
            if action in self.by_action:
                raise DomainError(f"duplicate action name {action!r}")
            self.by_action[action] = tool
            self.by_id[tool.spec.tool_id] = tool

    def specs(self) -> list[ToolSpec]:
        return [t.spec for t in self.tools]

    def action_to_tool_id(self, action_name: str) -> str | None:
        tool = self.by_action.get(action_name)
        return tool.spec.tool_id if tool else None


def render_registry(specs: list[ToolSpec]) -> dict[str, str]:
    """Render the prompt blocks: one description line per tool plus the name list."""
    if not specs:
        raise DomainError("registry must not be empty")
    seen: set[str] = set()
    for spec in specs:
        if spec.action_name in seen:
            raise DomainError(f"duplicate action name {spec.action_name!r}")
        seen.add(spec.action_name)
    tools_block = "\n".join(
        f"{spec.action_name}: {spec.rendered_description()}" for spec in specs
    )
    tool_names_block = ", ".join(spec.action_name for spec in specs)
    return {"tools_block": tools_block, "tool_names_block": tool_names_block}


def parse_action_input(spec: ToolSpec, input_text: str) -> dict | str:
    """Parse an Action Input payload against a tool spec.

    Returns the coerced payload dict, or an error string. JSON objects are
    the normal form; a bare string is accepted for tools with exactly one
    required string field.
    """
    text = input_text.strip()
    payload: dict | None = None
    try:
        parsed = json.loads(text)
        if isinstance(parsed, dict):
            payload = parsed
        elif isinstance(parsed, str):
            payload = {"__bare__": parsed}
    except (json.JSONDecodeError, ValueError):
        payload = {"__bare__": text}
    if payload is None:
        return "action input must be a JSON object"

    if "__bare__" in payload:
        required_strings = [
            i for i in spec.inputs if i.required and i.kind == "string"
        ]
        required = [i for i in spec.inputs if i.required]
        if len(required) == 1 and len(required_strings) == 1:
            payload = {required_strings[0].name: payload["__bare__"]}
        else:
            return "action input must be a JSON object"

    out: dict = {}
    for inp in spec.inputs:
        if inp.name not in payload:
            if inp.required:
                return f"missing required field {inp.name!r}"
            continue
        value = payload[inp.name]
        try:
            if inp.kind == "number":
                out[inp.name] = float(value)
            elif inp.kind == "integer":
                out[inp.name] = int(value)
            elif inp.kind == "flag":
                if isinstance(value, str):
                    value = value.strip().lower() in ("1", "true", "yes")
                out[inp.name] = 1 if value else 0
            else:
                out[inp.name] = value if isinstance(value, (int, float)) else str(value)
        except (TypeError, ValueError):
            return f"field {inp.name!r} must be a {inp.kind}"
    return out


def dispatch(registry: ToolRegistry, action_name: str, input_text: str) -> ToolResult:
    """Run a tool by action name; every failure comes back as error content."""
    tool = registry.by_action.get(action_name)
    if tool is None:
        names = ", ".join(t.spec.action_name for t in registry.tools)
        return _error(f"unknown tool {action_name!r}; valid tools: {names}")
    payload = parse_action_input(tool.spec, input_text)
    if isinstance(payload, str):
        return _error(payload)
    try:
        return tool.run(payload)
    except Exception as exc:  # noqa: BLE001 - tool bugs become observations
        return _error(f"tool {action_name!r} failed: {exc}")


_RANGE_INPUTS = (
    ToolInput("prom_service", "string"),
    ToolInput("prom_namespace", "string"),
    ToolInput("prom_port", "integer"),
    ToolInput("metric_name", "string"),
    ToolInput("metric_range_start", "number"),
    ToolInput("metric_range_end", "number"),
)


def build_default_registry(
    state: SimState,
    seed: int = DEFAULT_SEED,
    plot_format: str = "png",
    corpus: list[DocChunk] | None = None,
) -> ToolRegistry:
    """The standard nine-tool registry bound to a simulator state."""
    docs = corpus if corpus is not None else ragdocs.load_corpus()
    clock = state.clock

    specs_and_runs: list[tuple[ToolSpec, Callable[[dict], ToolResult]]] = [
        (
            ToolSpec(
                tool_id="T1",
                action_name=ACTION_NAMES["T1"],
                description=(
                    "Machine learning based capacity planning search. Generates "
                    "WireMock parameter configurations (thread pool size, CPU, "
                    "memory, JVM heap) that support a desired throughput KPI "
                    "value within a precision percentage, searching a given "
                    "number of epochs."
                ),
                inputs=(
                    ToolInput("target_kpi", "number"),
                    ToolInput("precision_pct", "number"),
                    ToolInput("epochs", "integer"),
                ),
                output_doc="The best parameter configuration found and its predicted KPI.",
            ),
            lambda p: tool_mlasp_search(p, seed),
        ),
        (
            ToolSpec(
                tool_id="T2",
                action_name=ACTION_NAMES["T2"],
                description=(
                    "Search the Red Hat OpenShift AI operator documentation for "
                    "procedures and how-to information and return the most "
                    "relevant passages."
                ),
                inputs=(ToolInput("query", "string"), ToolInput("k", "integer", False)),
                output_doc="Top matching documentation chunks.",
            ),
            lambda p: tool_rag_search(p, docs),
        ),
        (
            ToolSpec(
                tool_id="T3",
                action_name=ACTION_NAMES["T3"],
                description=(
                    "Calculate the timestamp, the ISO formatted date-time string "
                    "and the timezone string for the requested time. Use "
                    "time_value 'now' for the current time, or a number of "
                    "time_metric units (seconds, minutes, hours, days) with "
                    "ago_flag 1 for the past and 0 for the future."
                ),
                inputs=(
                    ToolInput("time_value", "string"),
                    ToolInput("time_metric", "string"),
                    ToolInput("ago_flag", "flag"),
                ),
                output_doc="timestamp, date_time_iso_format_string and timezone.",
            ),
            lambda p: tool_time_info(p, clock),
        ),
        (
            ToolSpec(
                tool_id="T4",
                action_name=ACTION_NAMES["T4"],
                description=(
                    "Find information about operators installed within a "
                    "namespace: operator name, version and deployment status."
                ),
                inputs=(ToolInput("namespace", "string"),),
                output_doc="List of operators with name, version and status.",
            ),
            lambda p: tool_list_operators(p, state),
        ),
        (
            ToolSpec(
                tool_id="T5",
                action_name=ACTION_NAMES["T5"],
                description=(
                    "Summarize the pods in a namespace: per-phase pod counters, "
                    "and for each running pod its name plus service name, "
                    "service ports and route when available."
                ),
                inputs=(ToolInput("namespace", "string"),),
                output_doc="Pod counters and running pod details.",
            ),
            lambda p: tool_pod_summary(p, state),
        ),
        (
            ToolSpec(
                tool_id="T6",
                action_name=ACTION_NAMES["T6"],
                description=(
                    "Summarize service information in an OpenShift namespace: "
                    "service names, port numbers and route information."
                ),
                inputs=(ToolInput("namespace", "string"),),
                output_doc="List of services with ports and routes.",
            ),
            lambda p: tool_service_summary(p, state),
        ),
        (
            ToolSpec(
                tool_id="T7",
                action_name=ACTION_NAMES["T7"],
                description=(
                    "List available metric names in the Prometheus instance "
                    "using a label filter, e.g. filter_name 'namespace' with "
                    "filter_value 'demo'."
                ),
                inputs=(
                    ToolInput("filter_name", "string"),
                    ToolInput("filter_value", "string"),
                ),
                output_doc="Sorted list of metric names.",
            ),
            lambda p: tool_metric_names(p, state),
        ),
        (
            ToolSpec(
                tool_id="T8",
                action_name=ACTION_NAMES["T8"],
                description=(
                    "List the metric values and associated timestamps between a "
                    "start and an end timestamp interval for a given metric "
                    "name stored in the Prometheus instance."
                ),
                inputs=_RANGE_INPUTS,
                output_doc="List of (timestamp, value) samples.",
            ),
            lambda p: tool_metric_range(p, state),
        ),
        (
            ToolSpec(
                tool_id="T9",
                action_name=ACTION_NAMES["T9"],
                description=(
                    "Create a file with the plot of the instantaneous rate "
                    "(irate) of a metric between a start and an end timestamp "
                    "and return the name of the plot file."
                ),
                inputs=_RANGE_INPUTS,
                output_doc="file_name of the generated plot.",
            ),
            lambda p: tool_plot_irate(p, state, plot_format),
        ),
    ]
    return ToolRegistry(
        tools=tuple(Tool(spec=s, run=r) for s, r in specs_and_runs)
    )
