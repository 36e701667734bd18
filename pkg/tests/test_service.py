import time

import pytest
from fastapi.testclient import TestClient

from opsbench.config import ServiceConfig
from opsbench.service import build_service, create_app


@pytest.fixture()
def service(tmp_path):
    config = ServiceConfig(artifact_dir=str(tmp_path / "artifacts"))
    state = build_service(config)
    return state, TestClient(create_app(state))


def _wait_done(client, trace_id, timeout=10.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        body = client.get(f"/v1/traces/{trace_id}").json()
        if body["done"]:
            return body
        time.sleep(0.02)
    raise AssertionError("trace never finished")


Q24_TEXT = (
    "Find out the Prometheus service name and port number running in "
    "namespace demo. Use it to to plot all the prometheus metric data for "
    "the metric load_generator_total_msg starting 40 days ago until now. "
    "Return only the file name and nothing else."
)


def test_healthz(service):
    _, client = service
    assert client.get("/healthz").text == "ok"


def test_chat_returns_trace_id_and_final_answer(service):
    _, client = service
    response = client.post("/v1/chat", json={"question": "What day is today?"})
    assert response.status_code == 200
    trace_id = response.json()["trace_id"]
    body = _wait_done(client, trace_id)
    assert body["outcome"] == "finished"
    assert "2024-11-01" in body["final_answer"]


def test_empty_question_is_400(service):
    _, client = service
    assert client.post("/v1/chat", json={"question": "  "}).status_code == 400


def test_unknown_backend_is_400(service):
    _, client = service
    response = client.post("/v1/chat", json={"question": "hi", "backend": "nope"})
    assert response.status_code == 400


def test_unknown_trace_is_404(service):
    _, client = service
    assert client.get("/v1/traces/deadbeef").status_code == 404
    assert client.get("/v1/traces/deadbeef/events").status_code == 404


def _stream_events(client, trace_id):
    events = []
    with client.stream("GET", f"/v1/traces/{trace_id}/events") as response:
        assert response.status_code == 200
        kind = None
        for line in response.iter_lines():
            if line.startswith("event: "):
                kind = line[len("event: ") :]
            elif line.startswith("data: "):
                import json

                events.append((kind, json.loads(line[len("data: ") :])))
    return events


def test_q24_stream_contains_four_action_observation_pairs_then_final(service):
    _, client = service
    trace_id = client.post("/v1/chat", json={"question": Q24_TEXT}).json()["trace_id"]
    _wait_done(client, trace_id)
    events = _stream_events(client, trace_id)
    kinds = [kind for kind, _ in events]
    assert kinds.count("action") == 4
    assert kinds.count("observation") == 4
    assert kinds[-1] == "final"
    seqs = [data["seq"] for _, data in events]
    assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)
    actions = [data["action"] for kind, data in events if kind == "action"]
    assert actions == [
        "Summarize_Services_Information_In_OpenShift_Namespace",
        "Get_timestamp_and_time_ISO",
        "Get_timestamp_and_time_ISO",
        "File_create_plot_irate",
    ]


def test_stream_replays_identically_on_reconnect(service):
    _, client = service
    trace_id = client.post("/v1/chat", json={"question": Q24_TEXT}).json()["trace_id"]
    _wait_done(client, trace_id)
    first = _stream_events(client, trace_id)
    second = _stream_events(client, trace_id)
    assert first == second
    assert first[0][1]["seq"] == 0


def test_stream_matches_stored_trace(service):
    _, client = service
    trace_id = client.post("/v1/chat", json={"question": Q24_TEXT}).json()["trace_id"]
    stored = _wait_done(client, trace_id)
    streamed = _stream_events(client, trace_id)
    assert len(streamed) == len(stored["events"])
    for (kind, data), ev in zip(streamed, stored["events"]):
        assert kind == ev["kind"]
        assert data["seq"] == ev["seq"]
        assert data["payload"] == ev["payload"]


def test_artifact_download_and_guards(service, tmp_path):
    state, client = service
    trace_id = client.post("/v1/chat", json={"question": Q24_TEXT}).json()["trace_id"]
    body = _wait_done(client, trace_id)
    name = body["final_answer"]
    response = client.get(f"/v1/artifacts/{name}")
    assert response.status_code == 200
    assert response.headers["content-type"] == "image/png"
    assert response.content[:8] == b"\x89PNG\r\n\x1a\n"

    # Encoded traversal never routes to the handler; either way it isn't served.
    assert client.get("/v1/artifacts/..%2Fsecrets").status_code in (400, 404)
    assert client.get("/v1/artifacts/FILE-plot-..-1-2.png").status_code == 400
    assert client.get("/v1/artifacts/notaplot.txt").status_code == 400
    missing = "FILE-plot-ghost-1-2.png"
    assert client.get(f"/v1/artifacts/{missing}").status_code == 404


def test_concurrent_chats_have_isolated_traces(service):
    _, client = service
    first = client.post("/v1/chat", json={"question": "Hi, who are you?"}).json()["trace_id"]
    second = client.post("/v1/chat", json={"question": "What day is today?"}).json()["trace_id"]
    assert first != second
    body_one = _wait_done(client, first)
    body_two = _wait_done(client, second)
    assert body_one["question"] != body_two["question"]
    payloads_one = {e["payload"] for e in body_one["events"]}
    payloads_two = {e["payload"] for e in body_two["events"]}
    assert body_one["final_answer"] not in payloads_two
    assert body_two["final_answer"] not in payloads_one


def test_saturation_returns_429(tmp_path):
    config = ServiceConfig(
        artifact_dir=str(tmp_path / "artifacts"), max_concurrent_runs=0
    )
    client = TestClient(create_app(build_service(config)))
    response = client.post("/v1/chat", json={"question": "hello"})
    assert response.status_code == 429


def test_tools_endpoint_lists_registry(service):
    _, client = service
    body = client.get("/v1/tools").json()
    assert len(body["tools"]) == 9
    names = body["tool_names_block"].split(", ")
    assert "File_create_plot_irate" in names


def test_session_memory_links_questions_when_enabled(tmp_path):
    config = ServiceConfig(
        artifact_dir=str(tmp_path / "artifacts"), memory_enabled=True
    )
    client = TestClient(create_app(build_service(config)))
    sid = "s-1"
    t1 = client.post(
        "/v1/chat",
        json={"question": "Can you describe Paris in 100 words or less?", "session_id": sid},
    ).json()["trace_id"]
    _wait_done(client, t1)
    t2 = client.post(
        "/v1/chat", json={"question": "Is there a river?", "session_id": sid}
    ).json()["trace_id"]
    body = _wait_done(client, t2)
    assert "Seine" in body["final_answer"]


def test_memory_disabled_keeps_turns_out_of_prompts(service):
    _, client = service
    sid = "s-2"
    t1 = client.post(
        "/v1/chat",
        json={"question": "Can you describe Paris in 100 words or less?", "session_id": sid},
    ).json()["trace_id"]
    _wait_done(client, t1)
    t2 = client.post(
        "/v1/chat", json={"question": "Is there a river?", "session_id": sid}
    ).json()["trace_id"]
    body = _wait_done(client, t2)
    assert "Seine" not in (body["final_answer"] or "")
