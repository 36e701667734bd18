import random

import pytest

from opsbench.domain import CounterGeneratorSpec
from opsbench.fixtures import (
    FixtureError,
    bundled_fixture,
    load_fixture,
    materialize_counter,
    serialize_fixture,
)


def test_bundled_fixture_echoes_known_ports():
    fixture = bundled_fixture()
    demo = fixture.namespace("demo")
    services = {s.name: s for s in demo.services}
    assert [(p.port, p.name) for p in services["prometheus-operated"].ports] == [
        (9090, "web"),
        (10901, "grpc"),
    ]
    assert services["grafana-demo-service"].ports[0].port == 3000
    assert services["influxdb"].ports[0].port == 8086
    assert [p.port for p in services["load-generator"].ports] == [9090, 9100]
    assert services["prometheus-operated"].route == "unavailable"


def test_empty_namespace_list_is_valid():
    assert load_fixture("namespaces: []").namespaces == ()
    assert load_fixture("{}").namespaces == ()


def test_dangling_service_ref_is_semantic_error():
    doc = """
namespaces:
  - name: demo
    pods:
      - {name: p1, phase: Running, services: [nope]}
"""
    with pytest.raises(FixtureError, match="unknown service 'nope'"):
        load_fixture(doc)


def test_duplicate_service_name_rejected():
    doc = """
namespaces:
  - name: demo
    services:
      - {name: a, ports: [{port: 80}]}
      - {name: a, ports: [{port: 81}]}
"""
    with pytest.raises(FixtureError, match="duplicate service"):
        load_fixture(doc)


def test_nonmonotonic_samples_rejected():
    doc = """
namespaces:
  - name: demo
    metrics:
      - metric_name: m
        samples: [[10, 1], [10, 2]]
"""
    with pytest.raises(FixtureError, match="strictly increase"):
        load_fixture(doc)


def test_syntax_error_reports_line_and_column():
    with pytest.raises(FixtureError, match=r"line \d+, column \d+"):
        load_fixture("namespaces:\n  - name: [unclosed")


def test_mismatched_namespace_label_rejected():
    doc = """
namespaces:
  - name: demo
    metrics:
      - metric_name: m
        labels: {namespace: other}
        samples: [[1, 1]]
"""
    with pytest.raises(FixtureError, match="namespace label"):
        load_fixture(doc)


def test_namespace_label_filled_from_enclosing_namespace():
    doc = """
namespaces:
  - name: demo
    metrics:
      - metric_name: m
        samples: [[1, 1]]
"""
    fixture = load_fixture(doc)
    assert fixture.namespace("demo").metrics[0].label("namespace") == "demo"


def test_port_out_of_range_rejected():
    doc = """
namespaces:
  - name: demo
    services:
      - {name: a, ports: [{port: 70000}]}
"""
    with pytest.raises(FixtureError, match="port"):
        load_fixture(doc)


def test_fixture_round_trip():
    fixture = bundled_fixture()
    assert load_fixture(serialize_fixture(fixture)) == fixture


def test_json_is_accepted_as_fixture_input():
    doc = '{"namespaces": [{"name": "n", "services": [{"name": "s", "ports": [{"port": 80}]}]}]}'
    assert load_fixture(doc).namespace("n").services[0].ports[0].port == 80


def test_counter_generator_is_deterministic_and_nondecreasing():
    rng = random.Random(7)
    for _ in range(200):
        start = rng.uniform(0, 1e9)
        step = rng.uniform(0.5, 5000)
        spec = CounterGeneratorSpec(
            start_ts=start,
            end_ts=start + rng.uniform(0, 100) * step,
            step_s=step,
            rate_per_s=rng.uniform(0, 50),
            jitter_seed=rng.randrange(1 << 30),
        )
        first = materialize_counter(spec)
        second = materialize_counter(spec)
        assert first == second
        timestamps = [t for t, _ in first]
        values = [v for _, v in first]
        assert all(b > a for a, b in zip(timestamps, timestamps[1:]))
        assert all(b >= a for a, b in zip(values, values[1:]))
