import pytest

from opsbench.domain import (
    AgentEvent,
    Category,
    DomainError,
    FailureKind,
    QueryCase,
    RunRecord,
    ToolInput,
    ToolSpec,
    ValidatorSpec,
    validate_trace,
)


def _tool_call_events():
    return (
        AgentEvent.thought("need services"),
        AgentEvent.action("Svc", '{"namespace": "demo"}'),
        AgentEvent.observation("svc_summary = []"),
        AgentEvent.final("done"),
    )


def test_valid_trace_passes():
    validate_trace(_tool_call_events())


def test_action_requires_observation():
    events = (AgentEvent.thought("t"), AgentEvent.action("A", "{}"))
    with pytest.raises(DomainError):
        validate_trace(events)


def test_action_with_two_observations_rejected():
    events = (
        AgentEvent.action("A", "{}"),
        AgentEvent.observation("one"),
        AgentEvent.observation("two"),
    )
    with pytest.raises(DomainError):
        validate_trace(events)


def test_final_must_be_last():
    events = (AgentEvent.final("x"), AgentEvent.thought("t"))
    with pytest.raises(DomainError):
        validate_trace(events)


def test_corrective_observation_after_thought_is_valid():
    events = (
        AgentEvent.thought("raw malformed completion"),
        AgentEvent.observation("invalid format"),
    )
    validate_trace(events)


def test_ar_query_needs_two_tools():
    with pytest.raises(DomainError):
        QueryCase(
            id="Q-XX",
            category=Category.AR,
            expected_tools=frozenset({"T1"}),
            text="x",
            validator=ValidatorSpec(required_substrings=("a",)),
        )


def test_sr_query_allows_at_most_one_tool():
    with pytest.raises(DomainError):
        QueryCase(
            id="Q-XX",
            category=Category.SR,
            expected_tools=frozenset({"T1", "T2"}),
            text="x",
            validator=ValidatorSpec(required_substrings=("a",)),
        )


def test_validator_needs_a_check_unless_expecting_failure():
    with pytest.raises(DomainError):
        ValidatorSpec()
    ValidatorSpec(expect_failure=True)  # no check required


def test_tool_spec_rejects_bad_action_names():
    with pytest.raises(DomainError):
        ToolSpec(
            tool_id="T1",
            action_name="9starts_with_digit",
            description="d",
            inputs=(),
            output_doc="o",
        )


def test_tool_spec_rendered_description_lists_fields():
    spec = ToolSpec(
        tool_id="T1",
        action_name="Do_something",
        description="Does something.",
        inputs=(ToolInput("alpha", "string"), ToolInput("beta", "integer", False)),
        output_doc="o",
    )
    rendered = spec.rendered_description()
    assert "alpha" in rendered and "beta" in rendered


def test_run_record_consistency():
    with pytest.raises(DomainError):
        RunRecord(
            backend_id="b",
            query_id="Q-01",
            repetition=1,
            wall_seconds=0.1,
            prompt_tokens=1,
            completion_tokens=1,
            success=True,
            failure_kind=FailureKind.TIMEOUT,
            trace=(),
        )
    record = RunRecord(
        backend_id="b",
        query_id="Q-01",
        repetition=1,
        wall_seconds=0.1,
        prompt_tokens=3,
        completion_tokens=4,
        success=True,
        failure_kind=FailureKind.NONE,
        trace=(),
    )
    assert record.total_tokens == 7
