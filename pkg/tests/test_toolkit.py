import json
import re

import pytest

from opsbench.fixtures import load_fixture
from opsbench.simcluster import Clock, build_state
from opsbench.toolkit import (
    ACTION_NAMES,
    PLOT_FILE_RE,
    build_default_registry,
    dispatch,
    format_number,
    parse_action_input,
    render_registry,
    render_samples_csv,
    tool_metric_csv,
    tool_time_info,
)

REFERENCE_TS = 1730500568.411993


def _fixed_clock():
    return Clock.fixed(REFERENCE_TS)


# --- time tool -------------------------------------------------------------


def test_time_now_matches_reference_run():
    result = tool_time_info(
        {"time_value": "now", "time_metric": "seconds", "ago_flag": 0}, _fixed_clock()
    )
    assert result.structured["timestamp"] == REFERENCE_TS
    assert (
        result.structured["date_time_iso_format_string"]
        == "2024-11-01T18:36:08.411993-04:00"
    )
    assert result.structured["timezone"] == "America/New_York"
    assert "timestamp = 1730500568.411993" in result.content


def test_time_48_hours_ago_is_exact_arithmetic():
    result = tool_time_info(
        {"time_value": 48, "time_metric": "hours", "ago_flag": 1}, _fixed_clock()
    )
    assert result.structured["timestamp"] == REFERENCE_TS - 172800


def test_time_three_hours_symmetry():
    ahead = tool_time_info(
        {"time_value": 3, "time_metric": "hours", "ago_flag": 0}, _fixed_clock()
    )
    ago = tool_time_info(
        {"time_value": 3, "time_metric": "hours", "ago_flag": 1}, _fixed_clock()
    )
    assert ahead.structured["timestamp"] - ago.structured["timestamp"] == 21600


def test_time_rejects_unknown_metric_and_negative_value():
    bad_unit = tool_time_info(
        {"time_value": 1, "time_metric": "fortnights", "ago_flag": 0}, _fixed_clock()
    )
    assert not bad_unit.ok and "time_metric" in bad_unit.content
    negative = tool_time_info(
        {"time_value": -5, "time_metric": "hours", "ago_flag": 0}, _fixed_clock()
    )
    assert not negative.ok


# --- listing tools ----------------------------------------------------------


def test_service_summary_tool_renders_reference_fields(registry):
    result = dispatch(
        registry,
        ACTION_NAMES["T6"],
        '{"namespace": "demo"}',
    )
    assert "prometheus-operated" in result.content
    assert "port = 9090, name = 'web'" in result.content
    assert "route = 'unavailable'" in result.content
    assert "name = 'No name available'" in result.content  # unnamed influxdb port


def test_metric_names_tool_lists_fixture_series(registry):
    result = dispatch(
        registry,
        ACTION_NAMES["T7"],
        '{"filter_name": "namespace", "filter_value": "demo"}',
    )
    assert "load_generator_total_msg" in result.content


def test_metric_range_tool_rejects_reversed_range(registry):
    result = dispatch(
        registry,
        ACTION_NAMES["T8"],
        json.dumps(
            {
                "prom_service": "prometheus-operated",
                "prom_namespace": "demo",
                "prom_port": 9090,
                "metric_name": "load_generator_total_msg",
                "metric_range_start": 100,
                "metric_range_end": 50,
            }
        ),
    )
    assert not result.ok
    assert "start must not exceed end" in result.content


def test_missing_required_field_becomes_error_observation(registry):
    result = dispatch(registry, ACTION_NAMES["T6"], "{}")
    assert not result.ok
    assert "namespace" in result.content


def test_unknown_action_becomes_error_observation(registry):
    result = dispatch(registry, "Not_a_tool", "{}")
    assert not result.ok and "unknown tool" in result.content


def test_bare_string_accepted_for_single_string_field(registry):
    result = dispatch(registry, ACTION_NAMES["T4"], "demo")
    assert "rhods-operator" in result.content


# --- csv -------------------------------------------------------------------


def test_csv_rendering_rules_by_hand():
    # floor(10.2) = 10 with integral 5.0 -> "5"; floor(20.9) = 20 with 6.5.
    assert render_samples_csv([(10.2, 5.0), (20.9, 6.5)]) == "timestamp,value\n10,5\n20,6.5"


def test_format_number_shortest_round_trip():
    assert format_number(5.0) == "5"
    assert format_number(6.5) == "6.5"
    assert float(format_number(0.1)) == 0.1


def _csv_payload(start, end, metric="load_generator_total_msg"):
    return {
        "prom_service": "prometheus-operated",
        "prom_namespace": "demo",
        "prom_port": 9090,
        "metric_name": metric,
        "metric_range_start": start,
        "metric_range_end": end,
    }


def test_csv_tool_counts_header_plus_rows(tmp_path):
    samples = ", ".join(f"[{i}, {i}]" for i in range(1000))
    doc = f"""
namespaces:
  - name: n
    metrics:
      - {{metric_name: big, samples: [{samples}]}}
"""
    state = build_state(load_fixture(doc), tmp_path, _fixed_clock())
    result = tool_metric_csv(_csv_payload(0, 2000, metric="big"), state)
    assert result.ok
    assert len(result.content.split("\n")) == 1001


def test_csv_tool_empty_range_is_error(demo_state):
    result = tool_metric_csv(_csv_payload(10, 20), demo_state)
    assert not result.ok and "no data" in result.content


# --- plots -------------------------------------------------------------------


def test_plot_tool_reproduces_reference_filename(demo_state, registry):
    payload = _csv_payload(1730327770.333979, REFERENCE_TS)
    result = dispatch(registry, ACTION_NAMES["T9"], json.dumps(payload))
    assert result.ok, result.content
    name = "FILE-plot-load_generator_total_msg-1730327770-1730500568.png"
    assert result.content == f"file_name='{name}'"
    assert result.artifacts == (name,)
    assert (demo_state.artifact_dir / name).exists()


def test_plot_tool_svg_variant_keeps_stem(demo_state):
    registry = build_default_registry(demo_state, plot_format="svg")
    payload = _csv_payload(1730327770.333979, REFERENCE_TS)
    result = dispatch(registry, ACTION_NAMES["T9"], json.dumps(payload))
    assert result.content == (
        "file_name='FILE-plot-load_generator_total_msg-1730327770-1730500568.svg'"
    )


def test_plot_filename_grammar_property(demo_state, registry):
    m = re.search(r"'([^']+)'", dispatch(
        registry, ACTION_NAMES["T9"],
        json.dumps(_csv_payload(1730400000.9, 1730500000.2)),
    ).content)
    name = m.group(1)
    assert PLOT_FILE_RE.match(name)
    start, end = map(int, re.findall(r"-(\d+)-(\d+)\.", name)[0])
    assert start <= end


def test_plot_tool_single_sample_is_error(tmp_path):
    doc = """
namespaces:
  - name: n
    metrics:
      - {metric_name: one, samples: [[100, 7]]}
"""
    state = build_state(load_fixture(doc), tmp_path, _fixed_clock())
    registry = build_default_registry(state)
    result = dispatch(
        registry, ACTION_NAMES["T9"], json.dumps(_csv_payload(0, 200, metric="one"))
    )
    assert not result.ok and "irate" in result.content


def test_plot_tool_empty_range_is_error(registry):
    result = dispatch(
        registry, ACTION_NAMES["T9"], json.dumps(_csv_payload(10, 20))
    )
    assert not result.ok and "no data in range" in result.content


def test_plot_tool_unknown_metric_is_error(registry):
    result = dispatch(
        registry, ACTION_NAMES["T9"], json.dumps(_csv_payload(0, 1, metric="ghost"))
    )
    assert not result.ok and "no such metric" in result.content


# --- capacity tool ------------------------------------------------------------


def test_capacity_tool_reports_all_parameters(registry):
    result = dispatch(
        registry,
        ACTION_NAMES["T1"],
        '{"target_kpi": 307, "precision_pct": 2.9, "epochs": 100}',
    )
    for fieldname in (
        "async_response_threads",
        "container_cpu",
        "container_memory_mb",
        "jvm_heap_mb",
        "predicted_kpi",
    ):
        assert fieldname in result.content


# --- registry ----------------------------------------------------------------


def test_registry_render_has_nine_tools(registry):
    render = render_registry(registry.specs())
    names = render["tool_names_block"].split(", ")
    assert len(names) == 9
    assert "Get_timestamp_and_time_ISO" in names
    assert "File_create_plot_irate" in names
    assert "Summarize_Services_Information_In_OpenShift_Namespace" in names


def test_registry_render_lists_every_input_field(registry):
    render = render_registry(registry.specs())
    for spec, line in zip(registry.specs(), render["tools_block"].split("\n")):
        assert line.startswith(f"{spec.action_name}: ")
        for inp in spec.inputs:
            assert inp.name in line


def test_single_tool_renders_one_line(registry):
    render = render_registry(registry.specs()[:1])
    assert "\n" not in render["tools_block"]


def test_render_rejects_duplicate_action_names(registry):
    specs = registry.specs()
    with pytest.raises(Exception):
        render_registry([specs[0], specs[0]])


def test_tool_results_are_deterministic(registry):
    payload = '{"namespace": "demo"}'
    first = dispatch(registry, ACTION_NAMES["T5"], payload)
    second = dispatch(registry, ACTION_NAMES["T5"], payload)
    assert first.content == second.content


def test_parse_action_input_coercions(registry):
    spec = registry.by_action[ACTION_NAMES["T9"]].spec
    parsed = parse_action_input(
        spec,
        '{"prom_service": "s", "prom_namespace": "n", "prom_port": "9090", '
        '"metric_name": "m", "metric_range_start": "1.5", "metric_range_end": 2}',
    )
    assert parsed["prom_port"] == 9090
    assert parsed["metric_range_start"] == 1.5
    bad = parse_action_input(spec, '{"prom_service": "s"}')
    assert isinstance(bad, str)
