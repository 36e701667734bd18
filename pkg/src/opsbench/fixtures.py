"""Fixture file parsing, validation and serialization.

Fixtures are YAML documents (JSON parses as a subset) describing namespaces,
their operators/pods/services and metric series. ``load_fixture`` reports
syntax errors with line/column and semantic errors with a path-like context.
"""

from __future__ import annotations

import random
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Any

import yaml

from .domain import (
    ClusterFixture,
    CounterGeneratorSpec,
    DomainError,
    MetricSeriesSpec,
    Namespace,
    OperatorInfo,
    PodInfo,
    PortInfo,
    ServiceInfo,
)


class FixtureError(ValueError):
    """Malformed fixture document (syntax or semantics)."""


def _fail(context: str, message: str) -> None:
    raise FixtureError(f"{context}: {message}")


def _require(mapping: Any, key: str, context: str) -> Any:
    if not isinstance(mapping, dict):
        _fail(context, f"expected a mapping, got {type(mapping).__name__}")
    if key not in mapping:
        _fail(context, f"missing required field {key!r}")
    return mapping[key]


def _as_list(value: Any, context: str) -> list:
    if value is None:
        return []
    if not isinstance(value, list):
        _fail(context, f"expected a list, got {type(value).__name__}")
    return value


def _parse_port(raw: Any, context: str) -> PortInfo:
    port = _require(raw, "port", context)
    if not isinstance(port, int) or isinstance(port, bool):
        _fail(context, "port must be an integer")
    name = raw.get("name")
    if name is not None:
        name = str(name)
    protocol = str(raw.get("protocol", "TCP"))
    try:
        return PortInfo(port=port, name=name, protocol=protocol)
    except DomainError as exc:
        _fail(context, str(exc))
    raise AssertionError("unreachable")


def _parse_service(raw: Any, context: str) -> ServiceInfo:
    name = str(_require(raw, "name", context))
    ports = tuple(
        _parse_port(p, f"{context}.ports[{i}]")
        for i, p in enumerate(_as_list(raw.get("ports"), f"{context}.ports"))
    )
    route = str(raw.get("route", "unavailable"))
    return ServiceInfo(name=name, ports=ports, route=route)


def _parse_pod(raw: Any, context: str) -> PodInfo:
    name = str(_require(raw, "name", context))
    phase = str(_require(raw, "phase", context))
    refs = tuple(str(s) for s in _as_list(raw.get("services"), f"{context}.services"))
    try:
        return PodInfo(name=name, phase=phase, service_refs=refs)
    except DomainError as exc:
        _fail(context, str(exc))
    raise AssertionError("unreachable")


def _parse_metric(raw: Any, ns_name: str, context: str) -> MetricSeriesSpec:
    metric_name = str(_require(raw, "metric_name", context))
    labels_raw = raw.get("labels") or {}
    if not isinstance(labels_raw, dict):
        _fail(context, "labels must be a mapping")
    labels = {str(k): str(v) for k, v in labels_raw.items()}
    # The enclosing namespace owns the series; a missing namespace label is
    # filled in, a conflicting one is rejected.
    if "namespace" not in labels:
        labels["namespace"] = ns_name
    elif labels["namespace"] != ns_name:
        _fail(context, f"namespace label {labels['namespace']!r} != {ns_name!r}")

    samples_raw = raw.get("samples")
    generator_raw = raw.get("generator")
    samples = None
    generator = None
    if samples_raw is not None:
        rows = _as_list(samples_raw, f"{context}.samples")
        parsed: list[tuple[float, float]] = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != 2:
                _fail(f"{context}.samples[{i}]", "expected a [timestamp, value] pair")
            parsed.append((float(row[0]), float(row[1])))
        samples = tuple(parsed)
    if generator_raw is not None:
        gctx = f"{context}.generator"
        kind = str(_require(generator_raw, "kind", gctx))
        if kind != "counter":
            _fail(gctx, f"unknown generator kind {kind!r}")
        try:
            generator = CounterGeneratorSpec(
                start_ts=float(_require(generator_raw, "start_ts", gctx)),
                end_ts=float(_require(generator_raw, "end_ts", gctx)),
                step_s=float(_require(generator_raw, "step_s", gctx)),
                rate_per_s=float(_require(generator_raw, "rate_per_s", gctx)),
                jitter_seed=int(_require(generator_raw, "jitter_seed", gctx)),
            )
        except DomainError as exc:
            _fail(gctx, str(exc))
    try:
        return MetricSeriesSpec(
            metric_name=metric_name,
            labels=tuple(sorted(labels.items())),
            samples=samples,
            generator=generator,
        )
    except DomainError as exc:
        _fail(context, str(exc))
    raise AssertionError("unreachable")


def _parse_namespace(raw: Any, context: str) -> Namespace:
    name = str(_require(raw, "name", context))
    operators = tuple(
        OperatorInfo(
            name=str(_require(op, "name", f"{context}.operators[{i}]")),
            version=str(_require(op, "version", f"{context}.operators[{i}]")),
            status=str(_require(op, "status", f"{context}.operators[{i}]")),
        )
        for i, op in enumerate(_as_list(raw.get("operators"), f"{context}.operators"))
    )
    services = tuple(
        _parse_service(s, f"{context}.services[{i}]")
        for i, s in enumerate(_as_list(raw.get("services"), f"{context}.services"))
    )
    pods = tuple(
        _parse_pod(p, f"{context}.pods[{i}]")
        for i, p in enumerate(_as_list(raw.get("pods"), f"{context}.pods"))
    )
    metrics = tuple(
        _parse_metric(m, name, f"{context}.metrics[{i}]")
        for i, m in enumerate(_as_list(raw.get("metrics"), f"{context}.metrics"))
    )
    ns = Namespace(
        name=name, operators=operators, pods=pods, services=services, metrics=metrics
    )
    _check_namespace(ns, context)
    return ns


def _check_namespace(ns: Namespace, context: str) -> None:
    seen: set[str] = set()
    for svc in ns.services:
        if svc.name in seen:
            _fail(context, f"duplicate service name {svc.name!r}")
        seen.add(svc.name)
    for pod in ns.pods:
        for ref in pod.service_refs:
            if ref not in seen:
                _fail(context, f"pod {pod.name!r} references unknown service {ref!r}")


def load_fixture(source: str) -> ClusterFixture:
    """Parse and validate a fixture document.

    Raises :class:`FixtureError` with line/column info on syntax errors and a
    descriptive path on semantic errors.
    """
    try:
        doc = yaml.safe_load(source)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        if mark is not None:
            raise FixtureError(
                f"syntax error at line {mark.line + 1}, column {mark.column + 1}: "
                f"{exc.problem}"
            ) from exc
        raise FixtureError(f"syntax error: {exc}") from exc
    except yaml.YAMLError as exc:
        raise FixtureError(f"syntax error: {exc}") from exc

    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise FixtureError("fixture: top level must be a mapping")
    ns_list = _as_list(doc.get("namespaces"), "namespaces")
    namespaces = []
    names: set[str] = set()
    for i, raw in enumerate(ns_list):
        ns = _parse_namespace(raw, f"namespaces[{i}]")
        if ns.name in names:
            _fail("namespaces", f"duplicate namespace {ns.name!r}")
        names.add(ns.name)
        namespaces.append(ns)
    return ClusterFixture(namespaces=tuple(namespaces))


def load_fixture_file(path: str | Path) -> ClusterFixture:
    return load_fixture(Path(path).read_text(encoding="utf-8"))


def bundled_fixture_text() -> str:
    """YAML text of the bundled demo cluster."""
    return (
        importlib_resources.files("opsbench.resources")
        .joinpath("demo.yaml")
        .read_text(encoding="utf-8")
    )


def bundled_fixture() -> ClusterFixture:
    return load_fixture(bundled_fixture_text())


# ---------------------------------------------------------------------------
# Serialization (round-trips through load_fixture)
# ---------------------------------------------------------------------------


def fixture_to_dict(fixture: ClusterFixture) -> dict:
    out: dict[str, Any] = {"namespaces": []}
    for ns in fixture.namespaces:
        entry: dict[str, Any] = {"name": ns.name}
        if ns.operators:
            entry["operators"] = [
                {"name": o.name, "version": o.version, "status": o.status}
                for o in ns.operators
            ]
        if ns.pods:
            entry["pods"] = [
                {"name": p.name, "phase": p.phase, "services": list(p.service_refs)}
                for p in ns.pods
            ]
        if ns.services:
            entry["services"] = [
                {
                    "name": s.name,
                    "ports": [
                        {"port": pt.port, "name": pt.name, "protocol": pt.protocol}
                        for pt in s.ports
                    ],
                    "route": s.route,
                }
                for s in ns.services
            ]
        if ns.metrics:
            metrics = []
            for m in ns.metrics:
                mentry: dict[str, Any] = {
                    "metric_name": m.metric_name,
                    "labels": dict(m.labels),
                }
                if m.samples is not None:
                    mentry["samples"] = [[t, v] for t, v in m.samples]
                if m.generator is not None:
                    g = m.generator
                    mentry["generator"] = {
                        "kind": "counter",
                        "start_ts": g.start_ts,
                        "end_ts": g.end_ts,
                        "step_s": g.step_s,
                        "rate_per_s": g.rate_per_s,
                        "jitter_seed": g.jitter_seed,
                    }
                metrics.append(mentry)
            entry["metrics"] = metrics
        out["namespaces"].append(entry)
    return out


def serialize_fixture(fixture: ClusterFixture) -> str:
    return yaml.safe_dump(fixture_to_dict(fixture), sort_keys=False)


# ---------------------------------------------------------------------------
# Generator materialization
# ---------------------------------------------------------------------------


def materialize_counter(spec: CounterGeneratorSpec) -> tuple[tuple[float, float], ...]:
    """Expand a counter generator into explicit samples.

    The counter starts at 0 and accumulates ``rate_per_s * step_s`` per step,
    scaled by a seeded jitter factor in [0.5, 1.5), so the series is
    nondecreasing and fully determined by ``jitter_seed``.
    """
    rng = random.Random(spec.jitter_seed)
    samples: list[tuple[float, float]] = []
    value = 0.0
    t = spec.start_ts
    while t <= spec.end_ts:
        samples.append((t, value))
        value += spec.rate_per_s * spec.step_s * (0.5 + rng.random())
        t += spec.step_s
    return tuple(samples)


def materialize_series(spec: MetricSeriesSpec) -> tuple[tuple[float, float], ...]:
    if spec.samples is not None:
        return spec.samples
    assert spec.generator is not None
    return materialize_counter(spec.generator)
