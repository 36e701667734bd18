"""Shared configuration parsing: clocks, backend specs, service config."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .backends import EndpointConfig, HttpChatBackend
from .engine import AgentLimits, CompletionBackend, MemoryPolicy
from .harness import DEFAULT_CLOCK_TS
from .scripted import FAULT_KINDS, fault_backend, golden_backend, load_policy_pack_file
from .simcluster import Clock, DEFAULT_TIMEZONE


class ConfigError(ValueError):
    pass


def parse_clock(spec: str, tz_name: str = DEFAULT_TIMEZONE) -> Clock:
    """Parse ``system``, ``fixed`` or ``fixed:<timestamp>`` clock specs."""
    if spec == "system":
        return Clock.system(tz_name)
    if spec == "fixed":
        return Clock.fixed(DEFAULT_CLOCK_TS, tz_name)
    if spec.startswith("fixed:"):
        try:
            return Clock.fixed(float(spec[len("fixed:") :]), tz_name)
        except ValueError as exc:
            raise ConfigError(f"bad clock spec {spec!r}") from exc
    raise ConfigError(f"unknown clock spec {spec!r}")


def load_endpoint_config(path: str | Path) -> tuple[str, EndpointConfig]:
    doc = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    try:
        config = EndpointConfig(
            base_url=str(doc["base_url"]),
            model=str(doc["model"]),
            auth_env_var=str(doc.get("auth_env_var", "")),
            timeout_s=float(doc.get("timeout_s", 60.0)),
            requests_per_second=float(doc.get("requests_per_second", 0.0)),
        )
    except KeyError as exc:
        raise ConfigError(f"endpoint config {path}: missing {exc}") from exc
    return str(doc.get("id", config.model)), config


def make_backend(spec: str) -> CompletionBackend:
    """Build a backend from a CLI/service spec string.

    Supported: ``scripted:golden``, ``scripted:fault:<kind>``,
    ``scripted:pack:<file>``, ``http:<endpoint-config.yaml>``.
    """
    if spec == "scripted:golden":
        return golden_backend()
    if spec.startswith("scripted:fault:"):
        kind = spec[len("scripted:fault:") :]
        if kind not in FAULT_KINDS:
            raise ConfigError(
                f"unknown fault kind {kind!r}; expected one of {', '.join(FAULT_KINDS)}"
            )
        return fault_backend(kind)
    if spec.startswith("scripted:pack:"):
        return load_policy_pack_file(spec[len("scripted:pack:") :])
    if spec.startswith("http:"):
        backend_id, endpoint = load_endpoint_config(spec[len("http:") :])
        return HttpChatBackend(endpoint, backend_id=backend_id)
    raise ConfigError(f"unknown backend spec {spec!r}")


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    artifact_dir: str = "artifacts"
    fixture: str = "builtin"
    backends: dict[str, str] = field(
        default_factory=lambda: {"golden": "scripted:golden"}
    )
    default_backend: str = "golden"
    clock: str = "fixed"
    timezone: str = DEFAULT_TIMEZONE
    memory_enabled: bool = False
    max_concurrent_runs: int = 4
    limits: AgentLimits = field(default_factory=AgentLimits)

    @property
    def memory_policy(self) -> MemoryPolicy:
        return MemoryPolicy(enabled=self.memory_enabled)


def load_service_config(path: str | Path) -> ServiceConfig:
    doc = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    limits_doc = doc.get("limits", {})
    limits = AgentLimits(
        max_iterations=int(limits_doc.get("max_iterations", 15)),
        max_output_chars=int(limits_doc.get("max_output_chars", 32768)),
        wall_timeout_s=float(limits_doc.get("wall_timeout_s", 180.0)),
        malformed_retry_budget=int(limits_doc.get("malformed_retry_budget", 1)),
    )
    config = ServiceConfig(
        host=str(doc.get("host", "127.0.0.1")),
        port=int(doc.get("port", 8080)),
        artifact_dir=str(doc.get("artifact_dir", "artifacts")),
        fixture=str(doc.get("fixture", "builtin")),
        backends={str(k): str(v) for k, v in doc.get("backends", {}).items()}
        or {"golden": "scripted:golden"},
        default_backend=str(doc.get("default_backend", "golden")),
        clock=str(doc.get("clock", "fixed")),
        timezone=str(doc.get("timezone", DEFAULT_TIMEZONE)),
        memory_enabled=bool(doc.get("memory_enabled", False)),
        max_concurrent_runs=int(doc.get("max_concurrent_runs", 4)),
        limits=limits,
    )
    if config.default_backend not in config.backends:
        raise ConfigError(f"default backend {config.default_backend!r} not configured")
    return config
