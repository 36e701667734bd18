"""The built-in 25-query benchmark suite and the suite file format.

Queries Q-01..Q-25 are embedded verbatim; each carries the tool expectations
and a programmatic validator resolved against the bundled demo fixture.
User-defined suites use the same schema as YAML files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

import yaml

from .domain import (
    ArtifactCheck,
    Category,
    DomainError,
    QueryCase,
    ValidatorSpec,
)

PLOT_FILENAME_RE = r"FILE-plot-load_generator_total_msg-\d+-\d+\.(png|svg)"
_TS_AND_ISO_RE = r"(?s)\d{10}(\.\d+)?.*\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}"

_TOOL_LIST_CHECK = ValidatorSpec(
    required_substrings=("Get_timestamp_and_time_ISO", "File_create_plot_irate"),
)

_OPERATOR_CHECK = ValidatorSpec(
    required_substrings=("$operators[*].name", "$operators[*].version"),
    required_tools=frozenset({"T4"}),
)

# The pod tool reports counters per phase but names only the running pods,
# so name checks stay scoped to those.
_POD_NAMES_CHECK = ValidatorSpec(
    required_substrings=("$pods[phase=Running].name",),
    required_tools=frozenset({"T5"}),
)

_RUNNING_POD_CHECK = ValidatorSpec(
    required_substrings=(
        "$pods[phase=Running].name",
        "$services[name=grafana-demo-service].route",
    ),
    required_tools=frozenset({"T5"}),
)

_TIME_PAIR_CHECK = ValidatorSpec(
    answer_regex=_TS_AND_ISO_RE,
    required_tools=frozenset({"T3"}),
)


def _case(
    qid: str,
    category: Category,
    tools: set[str],
    text: str,
    validator: ValidatorSpec,
) -> QueryCase:
    return QueryCase(
        id=qid,
        category=category,
        expected_tools=frozenset(tools),
        text=text,
        validator=validator,
    )


_BUILTIN: tuple[QueryCase, ...] = (
    _case(
        "Q-01",
        Category.SR,
        set(),
        "Hi, who are you?",
        ValidatorSpec(required_substrings=("assistant",)),
    ),
    _case(
        "Q-02",
        Category.SR,
        set(),
        "What tools do you have access to?",
        _TOOL_LIST_CHECK,
    ),
    _case(
        "Q-03",
        Category.SR,
        set(),
        "Give me the list of tools you have access to.",
        _TOOL_LIST_CHECK,
    ),
    _case(
        "Q-04",
        Category.SR,
        set(),
        "Give me the list and a short description of the tools you have access to.",
        ValidatorSpec(
            required_substrings=("Get_timestamp_and_time_ISO", "capacity planning"),
        ),
    ),
    _case(
        "Q-05",
        Category.SR,
        {"T4"},
        "What operators are in namespace demo?",
        _OPERATOR_CHECK,
    ),
    _case(
        "Q-06",
        Category.SR,
        {"T4"},
        "What operators are in namespace demo? Please provide only the name and "
        "the version for each operator.",
        _OPERATOR_CHECK,
    ),
    _case(
        "Q-07",
        Category.SR,
        {"T2"},
        "How can I create a Data Science Project?",
        ValidatorSpec(
            required_substrings=("Data Science Project",),
            required_tools=frozenset({"T2"}),
        ),
    ),
    _case(
        "Q-08",
        Category.SR,
        set(),
        "Can you describe Paris in 100 words or less?",
        ValidatorSpec(required_substrings=("Paris",)),
    ),
    _case(
        "Q-09",
        Category.SR,
        set(),
        "Is there a river?",
        # Unanswerable without chat memory of Q-08; the correct answer would
        # name the Seine, so the benchmark expects this query to fail.
        ValidatorSpec(required_substrings=("Seine",), expect_failure=True),
    ),
    _case(
        "Q-10",
        Category.SR,
        {"T5"},
        "Tell me about the pods in namespace demo.",
        _POD_NAMES_CHECK,
    ),
    _case(
        "Q-11",
        Category.SR,
        {"T5"},
        "Give me a summary of the running pods in namespace demo. Please include "
        "service and route information in the response.",
        _RUNNING_POD_CHECK,
    ),
    _case(
        "Q-12",
        Category.SR,
        {"T5"},
        "Give me the complete summary of the pods in namespace demo.",
        _POD_NAMES_CHECK,
    ),
    _case(
        "Q-13",
        Category.SR,
        {"T5"},
        "Give me a summary of the running pods in namespace demo. Give me only "
        "the names and the route if they have one.",
        _RUNNING_POD_CHECK,
    ),
    _case(
        "Q-14",
        Category.SR,
        {"T3"},
        "What day is today?",
        ValidatorSpec(
            answer_regex=r"\d{4}-\d{2}-\d{2}",
            required_tools=frozenset({"T3"}),
        ),
    ),
    _case(
        "Q-15",
        Category.SR,
        {"T3"},
        "What is the current date time?",
        ValidatorSpec(
            answer_regex=r"\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}",
            required_tools=frozenset({"T3"}),
        ),
    ),
    _case(
        "Q-16",
        Category.SR,
        {"T3"},
        "What is the current timestamp?",
        ValidatorSpec(
            answer_regex=r"\d{10}(\.\d+)?",
            required_tools=frozenset({"T3"}),
        ),
    ),
    _case(
        "Q-17",
        Category.SR,
        {"T3"},
        "What is the timestamp and date time for 3 hours ago?",
        _TIME_PAIR_CHECK,
    ),
    _case(
        "Q-18",
        Category.SR,
        {"T3"},
        "What is the timestamp and date time for 3 hours from now?",
        _TIME_PAIR_CHECK,
    ),
    _case(
        "Q-19",
        Category.SR,
        {"T3"},
        "What is the timestamp and date time for 3 hours ago?",
        _TIME_PAIR_CHECK,
    ),
    _case(
        "Q-20",
        Category.SR,
        {"T6"},
        "Is there a prometheus service running in namespace demo? If so, give me "
        "its name and port values.",
        ValidatorSpec(
            required_substrings=("prometheus-operated", "9090", "10901"),
            required_tools=frozenset({"T6"}),
        ),
    ),
    _case(
        "Q-21",
        Category.AR,
        {"T6", "T7"},
        "Find out the service name and port number of the Prometheus service "
        "running in namespace demo. Then use that information to retrieve the "
        "list of metrics filtered by namespace demo.",
        ValidatorSpec(
            required_substrings=("load_generator_total_msg",),
            required_tools=frozenset({"T6", "T7"}),
            tool_order=(("T6", "T7"),),
        ),
    ),
    _case(
        "Q-22",
        Category.AR,
        {"T6", "T7"},
        "Find out the Prometheus service name and port number running in "
        "namespace demo. Give me all the metrics stored by it that have a name "
        "that starts with load_generator.",
        ValidatorSpec(
            required_substrings=(
                "load_generator_total_msg",
                "load_generator_active_sessions",
            ),
            required_tools=frozenset({"T6", "T7"}),
            tool_order=(("T6", "T7"),),
        ),
    ),
    _case(
        "Q-23",
        Category.SR,
        {"T1"},
        "What configuration of WireMock supports a throughput KPI of 307 within "
        "a 2.9 percent precision? Search for 100 epochs to find the result.",
        ValidatorSpec(
            required_substrings=(
                "async_response_threads",
                "container_cpu",
                "container_memory_mb",
                "jvm_heap_mb",
            ),
            required_tools=frozenset({"T1"}),
        ),
    ),
    _case(
        "Q-24",
        Category.AR,
        {"T3", "T6", "T9"},
        "Find out the Prometheus service name and port number running in "
        "namespace demo. Use it to to plot all the prometheus metric data for "
        "the metric load_generator_total_msg starting 40 days ago until now. "
        "Return only the file name and nothing else.",
        ValidatorSpec(
            answer_regex=rf"^{PLOT_FILENAME_RE}$",
            required_tools=frozenset({"T3", "T6", "T9"}),
            tool_order=(("T6", "T9"), ("T3", "T9")),
            artifact_checks=(ArtifactCheck(filename_regex=PLOT_FILENAME_RE),),
        ),
    ),
    _case(
        "Q-25",
        Category.AR,
        {"T3", "T6", "T8"},
        "Find out the Prometheus service name and port number running in "
        "namespace demo. Use that to get all the prometheus metric data for the "
        "metric load_generator_total_msg starting 40 days ago until now. Print "
        "out only the metric values and their associated timestamp as a CSV "
        "table.",
        ValidatorSpec(
            required_substrings=("timestamp,value",),
            answer_regex=r"(?m)^\d+,\d",
            required_tools=frozenset({"T3", "T6", "T8"}),
            tool_order=(("T6", "T8"), ("T3", "T8")),
        ),
    ),
)


def builtin_suite() -> list[QueryCase]:
    """Return the 25 built-in benchmark queries."""
    return list(_BUILTIN)


def check_suite(cases: list[QueryCase]) -> None:
    """Validate cross-case suite invariants (unique ids)."""
    seen: set[str] = set()
    for case in cases:
        if case.id in seen:
            raise DomainError(f"duplicate query id {case.id!r}")
        seen.add(case.id)


# ---------------------------------------------------------------------------
# Suite files
# ---------------------------------------------------------------------------


def _validator_from_dict(raw: dict[str, Any] | None) -> ValidatorSpec:
    raw = raw or {}
    checks = tuple(
        ArtifactCheck(
            filename_regex=str(c["filename_regex"]),
            must_exist=bool(c.get("must_exist", True)),
        )
        for c in raw.get("artifact_checks", [])
    )
    return ValidatorSpec(
        required_substrings=tuple(str(s) for s in raw.get("required_substrings", [])),
        answer_regex=raw.get("answer_regex"),
        required_tools=frozenset(str(t) for t in raw.get("required_tools", [])),
        tool_order=tuple(
            (str(a), str(b)) for a, b in raw.get("tool_order", [])
        ),
        artifact_checks=checks,
        expect_failure=bool(raw.get("expect_failure", False)),
    )


def load_suite(text: str) -> list[QueryCase]:
    """Parse a YAML suite file (list of query entries)."""
    doc = yaml.safe_load(text)
    if not isinstance(doc, list):
        raise DomainError("suite file must be a list of query entries")
    cases = []
    for entry in doc:
        cases.append(
            QueryCase(
                id=str(entry["id"]),
                category=Category(str(entry["category"])),
                expected_tools=frozenset(str(t) for t in entry.get("expected_tools", [])),
                text=str(entry["text"]),
                validator=_validator_from_dict(entry.get("validator")),
            )
        )
    check_suite(cases)
    return cases


def load_suite_file(path: str | Path) -> list[QueryCase]:
    return load_suite(Path(path).read_text(encoding="utf-8"))
