"""Minimal HTTP facade over the simulated cluster.

Two Prometheus-style read endpoints plus three simulator listings, enough to
drive the toolkit out of process. Responses are plain serializations of the
in-process operations so both paths always agree.
"""

from __future__ import annotations

import re
import socket
import threading
import time

import uvicorn
from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .simcluster import (
    PodSummary,
    SimState,
    list_operators,
    metric_names,
    pod_summary,
    range_samples,
    service_summary,
)
from .toolkit import format_number

_MATCHER_RE = re.compile(r'^\{([A-Za-z_][A-Za-z0-9_]*)="([^"]*)"\}$')


def port_dict(port) -> dict:
    return {"port": port.port, "name": port.name, "protocol": port.protocol}


def service_dict(svc) -> dict:
    return {
        "name": svc.name,
        "ports": [port_dict(p) for p in svc.ports],
        "route": svc.route,
    }


def operator_dict(op) -> dict:
    return {"name": op.name, "version": op.version, "status": op.status}


def pod_summary_dict(summary: PodSummary) -> dict:
    return {
        "namespace": summary.namespace,
        "phase_counts": dict(summary.phase_counts),
        "running": [
            {
                "name": d.name,
                "service_name": d.service_name,
                "ports": [port_dict(p) for p in d.ports],
                "route": d.route,
            }
            for d in summary.running
        ],
    }


def query_range_payload(state: SimState, metric: str, start: float, end: float) -> dict:
    result = range_samples(state, metric, start, end)
    series = []
    if result.samples:
        series.append(
            {
                "metric": {"__name__": metric},
                "values": [[t, format_number(v)] for t, v in result.samples],
            }
        )
    return {"status": "success", "data": {"result": series}}


def metric_names_payload(state: SimState, name: str, value: str) -> dict:
    return {"status": "success", "data": metric_names(state, name, value)}


def _bad_request(message: str) -> JSONResponse:
    return JSONResponse(
        status_code=400, content={"status": "error", "error": message}
    )


def create_facade_app(state: SimState) -> FastAPI:
    app = FastAPI(title="cluster simulator facade")

    @app.get("/healthz")
    def healthz() -> PlainTextResponse:
        return PlainTextResponse("ok")

    @app.get("/api/v1/label/__name__/values")
    def label_values(request: Request):
        matcher = request.query_params.get("match[]", "")
        m = _MATCHER_RE.match(matcher)
        if not m:
            return _bad_request(f"bad match[] selector: {matcher!r}")
        return metric_names_payload(state, m.group(1), m.group(2))

    @app.get("/api/v1/query_range")
    def query_range(
        query: str = Query(""), start: str = Query(""), end: str = Query("")
    ):
        if not query:
            return _bad_request("missing query parameter")
        try:
            start_ts, end_ts = float(start), float(end)
        except ValueError:
            return _bad_request("start and end must be numbers")
        if start_ts > end_ts:
            return _bad_request("start must not exceed end")
        return query_range_payload(state, query, start_ts, end_ts)

    @app.get("/sim/v1/namespaces/{ns}/operators")
    def operators(ns: str):
        return [operator_dict(o) for o in list_operators(state, ns)]

    @app.get("/sim/v1/namespaces/{ns}/services")
    def services(ns: str):
        return [service_dict(s) for s in service_summary(state, ns)]

    @app.get("/sim/v1/namespaces/{ns}/pods")
    def pods(ns: str):
        return pod_summary_dict(pod_summary(state, ns))

    return app


class FacadeHandle:
    """A running facade server; stop() shuts it down."""

    def __init__(self, server: uvicorn.Server, thread: threading.Thread, port: int):
        self._server = server
        self._thread = thread
        self.port = port

    def stop(self) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)


def serve_http(state: SimState, bind_address: str = "127.0.0.1:0") -> FacadeHandle:
    """Serve the facade on host:port (port 0 picks a free one) until stopped."""
    host, _, port_text = bind_address.partition(":")
    port = int(port_text or 0)
    # Fail fast on unbindable addresses instead of dying inside the thread.
    probe = socket.socket()
    try:
        probe.bind((host, port))
        bound_port = probe.getsockname()[1]
    finally:
        probe.close()

    config = uvicorn.Config(
        create_facade_app(state), host=host, port=bound_port, log_level="warning"
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started and time.monotonic() < deadline:
        time.sleep(0.01)
    if not server.started:
        raise RuntimeError(f"facade did not start on {bind_address}")
    return FacadeHandle(server, thread, bound_port)
