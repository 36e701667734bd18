"""Benchmark protocol: validation, the sweep runner, aggregation, reports.

A sweep executes suite x repetitions per backend, validates every answer
programmatically against the fixture, and aggregates accuracy, latency
percentiles (nearest-rank) and token counts into appendix-shaped tables.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .domain import (
    BenchmarkReport,
    Category,
    ClusterFixture,
    FailureKind,
    QueryCase,
    ReportCell,
    RunRecord,
    ValidatorSpec,
    trace_actions,
)
from .engine import (
    AgentLimits,
    AgentRunResult,
    CompletionBackend,
    MemoryPolicy,
    OUTCOME_BACKEND_ERROR,
    OUTCOME_FINISHED,
    OUTCOME_MAX_ITERATIONS,
    OUTCOME_PARSE_FAILURE,
    OUTCOME_TIMEOUT,
    run_agent,
)
from .simcluster import SimState
from .toolkit import DEFAULT_SEED, ToolRegistry, build_default_registry

# The pinned default clock: the timestamp of the recorded reference run that
# the golden backend reproduces end to end.
DEFAULT_CLOCK_TS = 1730500568.411993

DEFAULT_VALIDATION_NAMESPACE = "demo"


class ConfigurationError(ValueError):
    """Bad benchmark configuration detected before any run starts."""


# ---------------------------------------------------------------------------
# Symbolic fixture references
# ---------------------------------------------------------------------------

_SEGMENT_RE = re.compile(r"^([a-z_]+)(?:\[([^\]]*)\])?$")

_SECTION_FIELDS = ("operators", "pods", "services", "metrics", "ports")


def _split_segments(path: str) -> list[str]:
    segments = []
    depth = 0
    current = ""
    for ch in path:
        if ch == "." and depth == 0:
            segments.append(current)
            current = ""
            continue
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        current += ch
    segments.append(current)
    return segments


def resolve_fixture_ref(
    fixture: ClusterFixture, ref: str, namespace: str = DEFAULT_VALIDATION_NAMESPACE
) -> list[str]:
    """Expand a ``$section[selector].field`` reference into fixture values.

    Selectors are ``*`` or ``field=value``; paths may nest (for example
    ``$services[name=prometheus-operated].ports[*].port``). Raises
    :class:`ConfigurationError` when nothing resolves.
    """
    if not ref.startswith("$"):
        return [ref]
    ns = fixture.namespace(namespace)
    if ns is None:
        raise ConfigurationError(f"{ref}: unknown namespace {namespace!r}")
    current: list[object] = [ns]
    for segment in _split_segments(ref[1:]):
        m = _SEGMENT_RE.match(segment)
        if not m:
            raise ConfigurationError(f"{ref}: bad segment {segment!r}")
        name, selector = m.group(1), m.group(2)
        next_objs: list[object] = []
        for obj in current:
            try:
                value = getattr(obj, "service_refs" if name == "service_refs" else name)
            except AttributeError as exc:
                raise ConfigurationError(f"{ref}: unknown field {name!r}") from exc
            if selector is None:
                next_objs.append(value)
                continue
            if name not in _SECTION_FIELDS:
                raise ConfigurationError(f"{ref}: field {name!r} is not selectable")
            items = list(value)
            if selector != "*":
                if "=" not in selector:
                    raise ConfigurationError(f"{ref}: bad selector {selector!r}")
                key, _, expected = selector.partition("=")
                items = [i for i in items if str(getattr(i, key, None)) == expected]
            next_objs.extend(items)
        current = next_objs
    values = [str(v) for v in current if isinstance(v, (str, int, float))]
    if not values:
        raise ConfigurationError(f"{ref}: resolved to no values")
    return values


def resolve_validator(
    validator: ValidatorSpec, fixture: ClusterFixture, namespace: str
) -> ValidatorSpec:
    resolved: list[str] = []
    for entry in validator.required_substrings:
        resolved.extend(resolve_fixture_ref(fixture, entry, namespace))
    if resolved == list(validator.required_substrings):
        return validator
    return ValidatorSpec(
        required_substrings=tuple(resolved),
        answer_regex=validator.answer_regex,
        required_tools=validator.required_tools,
        tool_order=validator.tool_order,
        artifact_checks=validator.artifact_checks,
        expect_failure=validator.expect_failure,
    )


def resolve_suite(
    suite: list[QueryCase],
    fixture: ClusterFixture,
    namespace: str = DEFAULT_VALIDATION_NAMESPACE,
) -> list[QueryCase]:
    """Resolve all symbolic validator references up front (fail fast)."""
    out = []
    for case in suite:
        try:
            validator = resolve_validator(case.validator, fixture, namespace)
        except ConfigurationError as exc:
            raise ConfigurationError(f"{case.id}: {exc}") from exc
        out.append(
            QueryCase(
                id=case.id,
                category=case.category,
                expected_tools=case.expected_tools,
                text=case.text,
                validator=validator,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    success: bool  # raw correctness; this is what accuracy scores
    failure_kind: FailureKind
    expected: bool  # True when the outcome matched the validator's expectation


_OUTCOME_KINDS = {
    OUTCOME_TIMEOUT: FailureKind.TIMEOUT,
    OUTCOME_BACKEND_ERROR: FailureKind.BACKEND_ERROR,
    OUTCOME_MAX_ITERATIONS: FailureKind.FLAWED_REASONING,
}


def _raw_verdict(
    query: QueryCase,
    run: AgentRunResult,
    state: SimState,
    registry: ToolRegistry,
) -> tuple[bool, FailureKind]:
    validator = query.validator
    if run.outcome != OUTCOME_FINISHED:
        if run.outcome == OUTCOME_PARSE_FAILURE:
            kind = FailureKind.TRUNCATION if run.truncated else FailureKind.PARSE_ERROR
        else:
            kind = _OUTCOME_KINDS.get(run.outcome, FailureKind.FLAWED_REASONING)
        return False, kind

    used: list[str] = []
    for ev in trace_actions(run.trace):
        tool_id = registry.action_to_tool_id(ev.action_name)
        if tool_id is not None:
            used.append(tool_id)
    if validator.required_tools:
        if not used:
            return False, FailureKind.DEFLECTION
        if not validator.required_tools.issubset(used):
            return False, FailureKind.TOOL_MISUSE
    first_use = {tid: used.index(tid) for tid in set(used)}
    for before, after in validator.tool_order:
        if before in first_use and after in first_use:
            if first_use[before] > first_use[after]:
                return False, FailureKind.FLAWED_REASONING

    answer = run.final_answer or ""
    for needle in validator.required_substrings:
        if needle not in answer:
            return False, FailureKind.HALLUCINATION
    if validator.answer_regex and not re.search(validator.answer_regex, answer):
        return False, FailureKind.HALLUCINATION
    for check in validator.artifact_checks:
        m = re.search(check.filename_regex, answer)
        if not m:
            return False, FailureKind.HALLUCINATION
        if check.must_exist and not (state.artifact_dir / m.group(0)).exists():
            return False, FailureKind.HALLUCINATION
    return True, FailureKind.NONE


def validate(
    query: QueryCase,
    run: AgentRunResult,
    state: SimState,
    registry: ToolRegistry,
) -> Verdict:
    """Score one agent run against the query's validator."""
    ok, kind = _raw_verdict(query, run, state, registry)
    expected = ok != query.validator.expect_failure
    return Verdict(success=ok, failure_kind=kind, expected=expected)


# ---------------------------------------------------------------------------
# The sweep
# ---------------------------------------------------------------------------


@dataclass
class SuiteRunConfig:
    suite: list[QueryCase]
    backends: list[CompletionBackend]
    repetitions: int = 10
    seed: int = DEFAULT_SEED
    parallel_workers: int = 1
    memory_policy: MemoryPolicy = field(default_factory=MemoryPolicy)
    limits: AgentLimits = field(default_factory=AgentLimits)

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ConfigurationError("repetitions must be >= 1")
        if self.parallel_workers < 1:
            raise ConfigurationError("parallel_workers must be >= 1")
        if not self.backends:
            raise ConfigurationError("at least one backend is required")


def _run_cell(
    backend: CompletionBackend,
    query: QueryCase,
    config: SuiteRunConfig,
    state: SimState,
    registry: ToolRegistry,
) -> list[RunRecord]:
    # Repetitions of one cell stay sequential so latency numbers are
    # contention-free even under a worker pool.
    records = []
    for rep in range(1, config.repetitions + 1):
        started = time.perf_counter()
        run = run_agent(
            backend,
            registry,
            query.text,
            limits=config.limits,
            memory_policy=config.memory_policy,
        )
        wall = time.perf_counter() - started
        verdict = validate(query, run, state, registry)
        records.append(
            RunRecord(
                backend_id=backend.backend_id,
                query_id=query.id,
                repetition=rep,
                wall_seconds=wall,
                prompt_tokens=run.prompt_tokens,
                completion_tokens=run.completion_tokens,
                success=verdict.success,
                failure_kind=verdict.failure_kind,
                trace=run.trace,
                expected=verdict.expected,
            )
        )
    return records


def run_benchmark(
    config: SuiteRunConfig,
    state: SimState,
    registry: ToolRegistry | None = None,
    fixture_namespace: str = DEFAULT_VALIDATION_NAMESPACE,
) -> list[RunRecord]:
    """Execute the full sweep: backend-major, then query-major, then repetition."""
    if registry is None:
        registry = build_default_registry(state, seed=config.seed)
    suite = resolve_suite(config.suite, state.fixture, fixture_namespace)
    cells = [(backend, query) for backend in config.backends for query in suite]
    if config.parallel_workers == 1:
        blocks = [_run_cell(b, q, config, state, registry) for b, q in cells]
    else:
        with ThreadPoolExecutor(max_workers=config.parallel_workers) as pool:
            futures = [
                pool.submit(_run_cell, b, q, config, state, registry) for b, q in cells
            ]
            blocks = [f.result() for f in futures]
    records: list[RunRecord] = []
    for block in blocks:
        records.extend(block)
    return records


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


def percentile(values: list[float], p: float) -> float:
    """Nearest-rank percentile: 1-based index ceil(p/100 * n) after sorting."""
    if not values:
        raise ValueError("percentile of empty list")
    if not 0 < p <= 100:
        raise ValueError("p must be in (0, 100]")
    ordered = sorted(values)
    n = len(ordered)
    if float(p).is_integer():
        rank = -(-int(p) * n // 100)  # exact integer ceiling
    else:
        rank = math.ceil(p * n / 100.0)
    return ordered[max(1, min(rank, n)) - 1]


def _cell_from_records(records: list[RunRecord]) -> ReportCell:
    walls = [r.wall_seconds for r in records]
    successes = sum(1 for r in records if r.success)
    return ReportCell(
        accuracy_pct=100.0 * successes / len(records),
        p50_s=percentile(walls, 50),
        p90_s=percentile(walls, 90),
        max_s=percentile(walls, 100),
        avg_tokens=sum(r.total_tokens for r in records) / len(records),
        repetitions=len(records),
    )


def aggregate(records: list[RunRecord], suite: list[QueryCase]) -> BenchmarkReport:
    """Per-(query, backend) aggregates plus per-category rollups."""
    if not records:
        raise ValueError("no records to aggregate")
    backend_ids: list[str] = []
    for r in records:
        if r.backend_id not in backend_ids:
            backend_ids.append(r.backend_id)
    query_ids = [q.id for q in suite]
    categories = {q.id: q.category for q in suite}

    grouped: dict[tuple[str, str], list[RunRecord]] = {}
    for r in records:
        grouped.setdefault((r.query_id, r.backend_id), []).append(r)

    cells = {key: _cell_from_records(recs) for key, recs in grouped.items()}

    rollups: dict[tuple[str, str], ReportCell] = {}
    for category in Category:
        for backend_id in backend_ids:
            members = [
                cells[(qid, backend_id)]
                for qid in query_ids
                if categories.get(qid) is category and (qid, backend_id) in cells
            ]
            if not members:
                continue
            n = len(members)
            # Pointwise p50 <= p90 <= max makes the averages ordered too.
            rollups[(category.value, backend_id)] = ReportCell(
                accuracy_pct=sum(c.accuracy_pct for c in members) / n,
                p50_s=sum(c.p50_s for c in members) / n,
                p90_s=sum(c.p90_s for c in members) / n,
                max_s=sum(c.max_s for c in members) / n,
                avg_tokens=sum(c.avg_tokens for c in members) / n,
                repetitions=sum(c.repetitions for c in members),
            )
    return BenchmarkReport(
        backend_ids=tuple(backend_ids),
        query_ids=tuple(qid for qid in query_ids if any(k[0] == qid for k in cells)),
        cells=cells,
        rollups=rollups,
    )


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def format_pct(value: float) -> str:
    return f"{round(value, 1):g}"


def format_seconds(value: float) -> str:
    return f"{value:.2f}"


def format_tokens(value: float) -> str:
    return f"{round(value, 1):g}"


def _rq1_rows(report: BenchmarkReport) -> list[list[str]]:
    rows = [["query", *report.backend_ids, "annotation"]]
    for qid in report.query_ids:
        row = [qid]
        for backend in report.backend_ids:
            cell = report.cells.get((qid, backend))
            row.append(format_pct(cell.accuracy_pct) if cell else "")
        row.append("")  # annotation column reserved, no semantics assigned
        rows.append(row)
    return rows


def _rq2_rows(report: BenchmarkReport) -> list[list[str]]:
    rows = [["query", "metric", *report.backend_ids]]
    for qid in report.query_ids:
        for metric, attr in (("P-50", "p50_s"), ("P-90", "p90_s"), ("Max", "max_s")):
            row = [qid, metric]
            for backend in report.backend_ids:
                cell = report.cells.get((qid, backend))
                row.append(format_seconds(getattr(cell, attr)) if cell else "")
            rows.append(row)
    return rows


def _rq3_rows(report: BenchmarkReport) -> list[list[str]]:
    rows = [["query", *report.backend_ids]]
    for qid in report.query_ids:
        row = [qid]
        for backend in report.backend_ids:
            cell = report.cells.get((qid, backend))
            row.append(format_tokens(cell.avg_tokens) if cell else "")
        rows.append(row)
    return rows


def _write_csv(path: Path, rows: list[list[str]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def _write_markdown(path: Path, rows: list[list[str]]) -> None:
    header, *body = rows
    lines = [
        "| " + " | ".join(header) + " |",
        "| " + " | ".join("---" for _ in header) + " |",
    ]
    lines.extend("| " + " | ".join(row) + " |" for row in body)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, rows: list[list[str]]) -> None:
    header, *body = rows
    payload = [dict(zip(header, row)) for row in body]
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def emit_reports(
    report: BenchmarkReport,
    out_dir: str | Path,
    formats: tuple[str, ...] = ("csv", "markdown", "json"),
) -> list[Path]:
    """Write rq1/rq2/rq3 tables plus a rollup summary; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tables = {
        "rq1_accuracy": _rq1_rows(report),
        "rq2_latency": _rq2_rows(report),
        "rq3_tokens": _rq3_rows(report),
    }
    writers = {"csv": (_write_csv, "csv"), "markdown": (_write_markdown, "md"),
               "json": (_write_json, "json")}
    written: list[Path] = []
    for fmt in formats:
        if fmt not in writers:
            raise ConfigurationError(f"unknown report format {fmt!r}")
        write, ext = writers[fmt]
        for stem, rows in tables.items():
            path = out / f"{stem}.{ext}"
            write(path, rows)
            written.append(path)
    summary = {
        "backends": list(report.backend_ids),
        "rollups": {
            f"{category}/{backend}": {
                "accuracy_pct": cell.accuracy_pct,
                "p50_s": cell.p50_s,
                "p90_s": cell.p90_s,
                "max_s": cell.max_s,
                "avg_tokens": cell.avg_tokens,
            }
            for (category, backend), cell in report.rollups.items()
        },
    }
    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    written.append(summary_path)
    return written
