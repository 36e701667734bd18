import json

import httpx
from fastapi.testclient import TestClient

from opsbench.simcluster import metric_names, pod_summary, range_samples, service_summary
from opsbench.simhttp import (
    create_facade_app,
    metric_names_payload,
    pod_summary_dict,
    query_range_payload,
    serve_http,
    service_dict,
)


def _client(demo_state):
    return TestClient(create_facade_app(demo_state))


def test_healthz(demo_state):
    response = _client(demo_state).get("/healthz")
    assert response.status_code == 200
    assert response.text == "ok"


def test_label_values_endpoint(demo_state):
    response = _client(demo_state).get(
        "/api/v1/label/__name__/values", params={"match[]": '{namespace="demo"}'}
    )
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "success"
    assert "load_generator_total_msg" in body["data"]
    assert body["data"] == metric_names(demo_state, "namespace", "demo")


def test_label_values_rejects_bad_selector(demo_state):
    response = _client(demo_state).get(
        "/api/v1/label/__name__/values", params={"match[]": "oops"}
    )
    assert response.status_code == 400


def test_query_range_matches_in_process(demo_state):
    params = {
        "query": "load_generator_active_sessions",
        "start": "1730480000",
        "end": "1730500000",
    }
    response = _client(demo_state).get("/api/v1/query_range", params=params)
    assert response.status_code == 200
    body = response.json()
    values = body["data"]["result"][0]["values"]
    samples = range_samples(
        demo_state, "load_generator_active_sessions", 1730480000, 1730500000
    ).samples
    assert values == [[t, v] for t, v in [[s[0], str(int(s[1]))] for s in samples]]
    # Prometheus convention: values are strings.
    assert all(isinstance(v[1], str) for v in values)


def test_query_range_start_after_end_is_400(demo_state):
    response = _client(demo_state).get(
        "/api/v1/query_range",
        params={"query": "up", "start": "100", "end": "50"},
    )
    assert response.status_code == 400


def test_query_range_unknown_metric_is_empty_result(demo_state):
    response = _client(demo_state).get(
        "/api/v1/query_range",
        params={"query": "ghost_metric", "start": "0", "end": "1"},
    )
    assert response.status_code == 200
    assert response.json()["data"]["result"] == []


def test_sim_endpoints_mirror_in_process_calls(demo_state):
    client = _client(demo_state)
    services = client.get("/sim/v1/namespaces/demo/services").json()
    assert services == [service_dict(s) for s in service_summary(demo_state, "demo")]
    pods = client.get("/sim/v1/namespaces/demo/pods").json()
    assert pods == pod_summary_dict(pod_summary(demo_state, "demo"))
    operators = client.get("/sim/v1/namespaces/demo/operators").json()
    assert operators[0]["name"] == "rhods-operator"
    assert client.get("/sim/v1/namespaces/none/services").json() == []


def test_facade_agrees_bit_for_bit_after_canonicalization(demo_state):
    client = _client(demo_state)
    http_payload = client.get(
        "/api/v1/label/__name__/values", params={"match[]": '{namespace="demo"}'}
    ).json()
    local_payload = metric_names_payload(demo_state, "namespace", "demo")
    assert json.dumps(http_payload, sort_keys=True) == json.dumps(
        local_payload, sort_keys=True
    )
    http_range = client.get(
        "/api/v1/query_range",
        params={"query": "up", "start": "0", "end": "2000000000"},
    ).json()
    local_range = query_range_payload(demo_state, "up", 0, 2000000000)
    assert json.dumps(http_range, sort_keys=True) == json.dumps(
        local_range, sort_keys=True
    )


def test_serve_http_binds_and_serves(demo_state):
    handle = serve_http(demo_state, "127.0.0.1:0")
    try:
        base = f"http://127.0.0.1:{handle.port}"
        assert httpx.get(f"{base}/healthz").text == "ok"
        body = httpx.get(
            f"{base}/api/v1/label/__name__/values",
            params={"match[]": '{namespace="demo"}'},
        ).json()
        assert "load_generator_total_msg" in body["data"]
    finally:
        handle.stop()
