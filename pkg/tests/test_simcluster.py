import random

import pytest

from opsbench.fixtures import load_fixture
from opsbench.simcluster import (
    Clock,
    build_state,
    irate_points,
    list_operators,
    metric_names,
    pod_summary,
    range_samples,
    service_summary,
)


def _state(tmp_path, doc):
    return build_state(load_fixture(doc), tmp_path, Clock.fixed(0.0))


def test_list_operators_echoes_fixture(demo_state):
    ops = list_operators(demo_state, "demo")
    assert [(o.name, o.version, o.status) for o in ops] == [
        ("rhods-operator", "2.8.0", "Succeeded")
    ]


def test_list_operators_unknown_namespace_is_empty(demo_state):
    assert list_operators(demo_state, "nonexistent") == []


def test_list_operators_preserves_fixture_order(tmp_path):
    doc = """
namespaces:
  - name: n
    operators:
      - {name: zeta, version: "1", status: Succeeded}
      - {name: alpha, version: "2", status: Installing}
"""
    state = _state(tmp_path, doc)
    assert [o.name for o in list_operators(state, "n")] == ["zeta", "alpha"]


def test_pod_summary_counts_by_phase(tmp_path):
    doc = """
namespaces:
  - name: n
    services:
      - {name: s, ports: [{port: 80}], route: unavailable}
    pods:
      - {name: a, phase: Running, services: [s]}
      - {name: b, phase: Running, services: [s]}
      - {name: c, phase: Succeeded}
"""
    state = _state(tmp_path, doc)
    summary = pod_summary(state, "n")
    # Hand count over the fixture: 2 running, 1 succeeded.
    assert summary.phase_counts == {
        "Running": 2,
        "Succeeded": 1,
        "Pending": 0,
        "Failed": 0,
    }
    assert sorted(d.name for d in summary.running) == ["a", "b"]


def test_pod_summary_empty_namespace(demo_state):
    summary = pod_summary(demo_state, "empty")
    assert summary.phase_counts == {
        "Running": 0,
        "Succeeded": 0,
        "Pending": 0,
        "Failed": 0,
    }
    assert summary.running == ()


def test_pod_summary_carries_unavailable_route(demo_state):
    summary = pod_summary(demo_state, "demo")
    prometheus = next(d for d in summary.running if d.name == "prometheus-operated-0")
    assert prometheus.route == "unavailable"


def test_service_summary_demo_prometheus(demo_state):
    services = {s.name: s for s in service_summary(demo_state, "demo")}
    prom = services["prometheus-operated"]
    assert [(p.port, p.name, p.protocol) for p in prom.ports] == [
        (9090, "web", "TCP"),
        (10901, "grpc", "TCP"),
    ]
    assert prom.route == "unavailable"
    grafana = services["grafana-demo-service"]
    assert grafana.ports[0].name == "grafana"
    assert grafana.route.startswith("http://")


def test_service_summary_unknown_namespace(demo_state):
    assert service_summary(demo_state, "nope") == []


def test_metric_names_demo(demo_state):
    names = metric_names(demo_state, "namespace", "demo")
    assert "load_generator_total_msg" in names
    assert names == sorted(names)


def test_metric_names_empty_namespace(demo_state):
    assert metric_names(demo_state, "namespace", "empty-ns") == []


def test_metric_names_deduplicates_shared_names(tmp_path):
    doc = """
namespaces:
  - name: n
    metrics:
      - {metric_name: m, labels: {job: a}, samples: [[1, 1]]}
      - {metric_name: m, labels: {job: b}, samples: [[1, 1]]}
"""
    state = _state(tmp_path, doc)
    assert metric_names(state, "namespace", "n") == ["m"]


def test_metric_names_requires_filter_name(demo_state):
    with pytest.raises(ValueError):
        metric_names(demo_state, "", "demo")


_RANGE_DOC = """
namespaces:
  - name: n
    metrics:
      - {metric_name: m, samples: [[10, 1], [20, 2], [30, 3]]}
"""


def test_range_samples_interval_filter(tmp_path):
    state = _state(tmp_path, _RANGE_DOC)
    result = range_samples(state, "m", 15, 30)
    assert result.metric_found
    assert result.samples == ((20.0, 2.0), (30.0, 3.0))


def test_range_samples_no_samples_in_range(tmp_path):
    state = _state(tmp_path, _RANGE_DOC)
    result = range_samples(state, "m", 40, 50)
    assert result.metric_found
    assert result.samples == ()


def test_range_samples_rejects_reversed_interval(tmp_path):
    state = _state(tmp_path, _RANGE_DOC)
    with pytest.raises(ValueError):
        range_samples(state, "m", 50, 40)


def test_range_samples_flags_unknown_metric(tmp_path):
    state = _state(tmp_path, _RANGE_DOC)
    result = range_samples(state, "missing", 0, 100)
    assert not result.metric_found
    assert result.samples == ()


def test_range_samples_merges_series_sharing_a_name(tmp_path):
    doc = """
namespaces:
  - name: n
    metrics:
      - {metric_name: m, labels: {job: a}, samples: [[10, 1], [30, 3]]}
      - {metric_name: m, labels: {job: b}, samples: [[20, 2]]}
"""
    state = _state(tmp_path, doc)
    result = range_samples(state, "m", 0, 100)
    assert [t for t, _ in result.samples] == [10.0, 20.0, 30.0]


def test_range_partition_property(tmp_path):
    state = _state(tmp_path, _RANGE_DOC)
    rng = random.Random(11)
    for _ in range(200):
        a = rng.uniform(0, 40)
        b = a + rng.uniform(0, 20)
        c = b + rng.uniform(0.001, 20)
        eps = 1e-9
        left = range_samples(state, "m", a, b).samples
        right = range_samples(state, "m", b + eps, c).samples
        whole = range_samples(state, "m", a, c).samples
        assert left + right == whole


def test_irate_simple_pair():
    assert irate_points([(0, 0), (10, 50)]) == [(10, 5.0)]


def test_irate_counter_reset():
    # Reset rule by hand: the counter dropped, so the rate is 40 / 10.
    assert irate_points([(0, 100), (10, 40)]) == [(10, 4.0)]


def test_irate_singleton_and_empty():
    assert irate_points([(0, 7)]) == []
    assert irate_points([]) == []


def test_irate_rejects_nonmonotonic_timestamps():
    with pytest.raises(ValueError):
        irate_points([(10, 1), (10, 2)])


def _brute_force_irate(samples):
    # Independent oracle: index-based loop, explicit case split.
    out = []
    for i in range(1, len(samples)):
        t_prev, v_prev = samples[i - 1]
        t_cur, v_cur = samples[i]
        if v_cur >= v_prev:
            out.append((t_cur, (v_cur - v_prev) / (t_cur - t_prev)))
        else:
            out.append((t_cur, v_cur / (t_cur - t_prev)))
    return out


def test_irate_matches_brute_force_on_random_series():
    rng = random.Random(1234)
    for _ in range(1000):
        n = rng.randrange(0, 40)
        t = 0.0
        samples = []
        value = rng.uniform(0, 100)
        for _ in range(n):
            t += rng.uniform(0.001, 50)
            if rng.random() < 0.15:  # occasional counter reset
                value = rng.uniform(0, 5)
            else:
                value += rng.uniform(0, 10)
            samples.append((t, value))
        assert irate_points(samples) == _brute_force_irate(samples)
