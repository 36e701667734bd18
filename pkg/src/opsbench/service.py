"""HTTP service exposing the agent for interactive use.

Chat requests start an agent run and return a trace id; clients follow the
run through a replayable server-sent event stream, download generated
artifacts, and list the tool registry. The service drives the exact same
agent path as the benchmark harness.
"""

from __future__ import annotations

import argparse
import json
import re
import threading
import time
import uuid
from dataclasses import dataclass, field

import uvicorn
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import (
    FileResponse,
    JSONResponse,
    PlainTextResponse,
    StreamingResponse,
)
from pydantic import BaseModel

from .config import ServiceConfig, load_service_config, make_backend, parse_clock
from .domain import ACTION, AgentEvent, FINAL, OBSERVATION, THOUGHT
from .engine import CompletionBackend, MemoryPolicy, OUTCOME_FINISHED, run_agent
from .fixtures import bundled_fixture, load_fixture_file
from .simcluster import SimState, build_state
from .toolkit import ToolRegistry, build_default_registry, render_registry

ARTIFACT_NAME_RE = re.compile(r"^FILE-[A-Za-z0-9_.:-]+\.(png|svg|csv)$")

_CONTENT_TYPES = {
    ".png": "image/png",
    ".svg": "image/svg+xml",
    ".csv": "text/csv",
}

_EVENT_KIND = {THOUGHT: "thought", ACTION: "action", OBSERVATION: "observation",
               FINAL: "final"}


@dataclass
class StreamEvent:
    seq: int
    kind: str
    payload: str
    action: str = ""


@dataclass
class TraceBuffer:
    trace_id: str
    question: str
    backend_id: str
    events: list[StreamEvent] = field(default_factory=list)
    done: bool = False
    outcome: str = ""
    final_answer: str | None = None
    cond: threading.Condition = field(default_factory=threading.Condition)

    def append(self, kind: str, payload: str, action: str = "") -> None:
        with self.cond:
            self.events.append(
                StreamEvent(seq=len(self.events), kind=kind, payload=payload,
                            action=action)
            )
            self.cond.notify_all()

    def finish(self, outcome: str, final_answer: str | None) -> None:
        with self.cond:
            self.done = True
            self.outcome = outcome
            self.final_answer = final_answer
            self.cond.notify_all()


@dataclass
class ChatSession:
    session_id: str
    created_at: float
    memory_policy: MemoryPolicy = field(default_factory=MemoryPolicy)
    # Turns are always recorded for display; they enter prompts only when
    # the session's memory policy allows it.
    turns: list[tuple[str, str]] = field(default_factory=list)


class ChatRequest(BaseModel):
    question: str = ""
    session_id: str | None = None
    backend: str | None = None


class ServiceState:
    def __init__(
        self,
        config: ServiceConfig,
        sim_state: SimState,
        registry: ToolRegistry,
        backends: dict[str, CompletionBackend],
    ) -> None:
        self.config = config
        self.sim_state = sim_state
        self.registry = registry
        self.backends = backends
        self.traces: dict[str, TraceBuffer] = {}
        self.sessions: dict[str, ChatSession] = {}
        self.lock = threading.Lock()
        self.active_runs = 0

    def session(self, session_id: str) -> ChatSession:
        with self.lock:
            if session_id not in self.sessions:
                self.sessions[session_id] = ChatSession(
                    session_id=session_id,
                    created_at=time.time(),
                    memory_policy=self.config.memory_policy,
                )
            return self.sessions[session_id]


def _run_chat(state: ServiceState, buf: TraceBuffer, backend: CompletionBackend,
              session: ChatSession | None) -> None:
    def on_event(ev: AgentEvent) -> None:
        kind = _EVENT_KIND[ev.kind]
        if ev.kind == ACTION:
            buf.append(kind, ev.input_text, action=ev.action_name)
        else:
            buf.append(kind, ev.text)

    try:
        turns = list(session.turns) if session else []
        policy = session.memory_policy if session else state.config.memory_policy
        result = run_agent(
            backend,
            state.registry,
            buf.question,
            limits=state.config.limits,
            memory_policy=policy,
            memory_turns=turns,
            on_event=on_event,
        )
        if result.outcome == OUTCOME_FINISHED:
            # The final event is emitted by on_event already; just bookkeeping.
            if session is not None:
                session.turns.append((buf.question, result.final_answer or ""))
            buf.finish(result.outcome, result.final_answer)
        else:
            buf.append("error", f"agent run ended with outcome {result.outcome}")
            buf.finish(result.outcome, None)
    except Exception as exc:  # noqa: BLE001 - surface as stream error event
        buf.append("error", f"internal error: {exc}")
        buf.finish("error", None)
    finally:
        with state.lock:
            state.active_runs -= 1


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="aiops agent service")
    # The chat console is served separately (static files); allow it in.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.get("/healthz")
    def healthz() -> PlainTextResponse:
        return PlainTextResponse("ok")

    @app.post("/v1/chat")
    def chat(body: ChatRequest):
        question = body.question.strip()
        if not question:
            return JSONResponse(status_code=400, content={"error": "question is empty"})
        backend_id = body.backend or state.config.default_backend
        backend = state.backends.get(backend_id)
        if backend is None:
            return JSONResponse(
                status_code=400, content={"error": f"unknown backend {backend_id!r}"}
            )
        with state.lock:
            if state.active_runs >= state.config.max_concurrent_runs:
                return JSONResponse(
                    status_code=429, content={"error": "agent is saturated, retry later"}
                )
            state.active_runs += 1
        session = state.session(body.session_id) if body.session_id else None
        trace_id = uuid.uuid4().hex
        buf = TraceBuffer(trace_id=trace_id, question=question, backend_id=backend_id)
        state.traces[trace_id] = buf
        thread = threading.Thread(
            target=_run_chat, args=(state, buf, backend, session), daemon=True
        )
        thread.start()
        return {"trace_id": trace_id}

    @app.get("/v1/traces/{trace_id}")
    def get_trace(trace_id: str):
        buf = state.traces.get(trace_id)
        if buf is None:
            return JSONResponse(status_code=404, content={"error": "unknown trace id"})
        with buf.cond:
            return {
                "trace_id": buf.trace_id,
                "question": buf.question,
                "backend": buf.backend_id,
                "done": buf.done,
                "outcome": buf.outcome,
                "final_answer": buf.final_answer,
                "events": [
                    {"seq": e.seq, "kind": e.kind, "payload": e.payload,
                     "action": e.action}
                    for e in buf.events
                ],
            }

    @app.get("/v1/traces/{trace_id}/events")
    def stream_trace(trace_id: str):
        buf = state.traces.get(trace_id)
        if buf is None:
            return JSONResponse(status_code=404, content={"error": "unknown trace id"})

        def frames():
            # Full replay from seq 0, then live follow; terminal on final/error.
            index = 0
            while True:
                with buf.cond:
                    while index >= len(buf.events) and not buf.done:
                        buf.cond.wait(timeout=0.2)
                    pending = list(buf.events[index:])
                    done = buf.done
                for ev in pending:
                    data = {"seq": ev.seq, "payload": ev.payload}
                    if ev.action:
                        data["action"] = ev.action
                    yield f"event: {ev.kind}\ndata: {json.dumps(data)}\n\n"
                    index += 1
                    if ev.kind in ("final", "error"):
                        return
                if done and index >= len(buf.events):
                    return

        return StreamingResponse(frames(), media_type="text/event-stream")

    @app.get("/v1/tools")
    def tools():
        render = render_registry(state.registry.specs())
        return {
            "tools_block": render["tools_block"],
            "tool_names_block": render["tool_names_block"],
            "tools": [
                {
                    "tool_id": spec.tool_id,
                    "action_name": spec.action_name,
                    "description": spec.description,
                    "inputs": [
                        {"name": i.name, "kind": i.kind, "required": i.required}
                        for i in spec.inputs
                    ],
                    "output_doc": spec.output_doc,
                }
                for spec in state.registry.specs()
            ],
        }

    @app.get("/v1/artifacts/{name}")
    def artifact(name: str):
        if not ARTIFACT_NAME_RE.match(name) or ".." in name or "/" in name:
            return JSONResponse(status_code=400, content={"error": "bad artifact name"})
        path = (state.sim_state.artifact_dir / name).resolve()
        if state.sim_state.artifact_dir.resolve() not in path.parents:
            return JSONResponse(status_code=400, content={"error": "bad artifact name"})
        if not path.is_file():
            return JSONResponse(status_code=404, content={"error": "artifact not found"})
        return FileResponse(path, media_type=_CONTENT_TYPES[path.suffix])

    return app


def build_service(config: ServiceConfig) -> ServiceState:
    fixture = (
        bundled_fixture()
        if config.fixture == "builtin"
        else load_fixture_file(config.fixture)
    )
    clock = parse_clock(config.clock, config.timezone)
    sim_state = build_state(fixture, config.artifact_dir, clock)
    registry = build_default_registry(sim_state)
    backends = {name: make_backend(spec) for name, spec in config.backends.items()}
    return ServiceState(config, sim_state, registry, backends)


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="run the agent chat service")
    parser.add_argument("--config", help="service config YAML", default=None)
    args = parser.parse_args(argv)
    config = load_service_config(args.config) if args.config else ServiceConfig()
    state = build_service(config)
    uvicorn.run(create_app(state), host=config.host, port=config.port)


if __name__ == "__main__":
    main()
