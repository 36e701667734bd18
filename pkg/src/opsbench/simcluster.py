"""In-memory simulated cluster and Prometheus-style time-series backend.

All read operations work off a :class:`SimState` built once from a fixture.
Unknown namespaces yield empty results (a listing never fails); only the
time-series range query distinguishes "no such metric" from "no samples".
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

from .domain import ClusterFixture, OperatorInfo, ServiceInfo
from .fixtures import materialize_series

DEFAULT_TIMEZONE = "America/New_York"


@dataclass(frozen=True)
class Clock:
    """Time source: system clock or a pinned timestamp for reproducible runs."""

    mode: str = "system"  # "system" | "fixed"
    fixed_ts: float = 0.0
    tz_name: str = DEFAULT_TIMEZONE

    def now(self) -> float:
        if self.mode == "fixed":
            return self.fixed_ts
        return time.time()

    @staticmethod
    def fixed(ts: float, tz_name: str = DEFAULT_TIMEZONE) -> "Clock":
        return Clock(mode="fixed", fixed_ts=ts, tz_name=tz_name)

    @staticmethod
    def system(tz_name: str = DEFAULT_TIMEZONE) -> "Clock":
        return Clock(mode="system", tz_name=tz_name)


@dataclass(frozen=True)
class PodDetail:
    name: str
    service_name: str
    ports: tuple
    route: str


@dataclass(frozen=True)
class PodSummary:
    namespace: str
    phase_counts: dict[str, int]
    running: tuple[PodDetail, ...]


@dataclass(frozen=True)
class RangeResult:
    metric_found: bool
    samples: tuple[tuple[float, float], ...]


SeriesKey = tuple[str, tuple[tuple[str, str], ...]]


@dataclass
class SimState:
    """Materialized simulator state shared read-only by all tools."""

    fixture: ClusterFixture
    artifact_dir: Path
    clock: Clock
    series_index: dict[SeriesKey, tuple[tuple[float, float], ...]] = field(
        default_factory=dict
    )

    def __post_init__(self) -> None:
        self.artifact_dir = Path(self.artifact_dir)
        self.artifact_dir.mkdir(parents=True, exist_ok=True)
        for ns in self.fixture.namespaces:
            for spec in ns.metrics:
                self.series_index[(spec.metric_name, spec.labels)] = (
                    materialize_series(spec)
                )

    def series_labels(self, metric_name: str) -> list[dict[str, str]]:
        return [
            dict(labels)
            for (name, labels) in self.series_index
            if name == metric_name
        ]


def build_state(
    fixture: ClusterFixture, artifact_dir: str | Path, clock: Clock | None = None
) -> SimState:
    return SimState(
        fixture=fixture,
        artifact_dir=Path(artifact_dir),
        clock=clock or Clock.system(),
    )


# ---------------------------------------------------------------------------
# Cluster listings
# ---------------------------------------------------------------------------


def list_operators(state: SimState, namespace: str) -> list[OperatorInfo]:
    """Operators of a namespace, fixture order; empty when unknown."""
    ns = state.fixture.namespace(namespace)
    return list(ns.operators) if ns else []


def service_summary(state: SimState, namespace: str) -> list[ServiceInfo]:
    """All services of a namespace with ports and route; empty when unknown."""
    ns = state.fixture.namespace(namespace)
    return list(ns.services) if ns else []


def pod_summary(state: SimState, namespace: str) -> PodSummary:
    """Per-phase pod counters plus service details for each running pod."""
    ns = state.fixture.namespace(namespace)
    counts = {"Running": 0, "Succeeded": 0, "Pending": 0, "Failed": 0}
    running: list[PodDetail] = []
    if ns is not None:
        services = {svc.name: svc for svc in ns.services}
        for pod in ns.pods:
            counts[pod.phase] += 1
            if pod.phase != "Running":
                continue
            if pod.service_refs:
                for ref in pod.service_refs:
                    svc = services[ref]
                    running.append(
                        PodDetail(
                            name=pod.name,
                            service_name=svc.name,
                            ports=svc.ports,
                            route=svc.route,
                        )
                    )
            else:
                running.append(
                    PodDetail(name=pod.name, service_name="", ports=(), route="")
                )
    return PodSummary(namespace=namespace, phase_counts=counts, running=tuple(running))


# ---------------------------------------------------------------------------
# Time series
# ---------------------------------------------------------------------------


def metric_names(state: SimState, filter_name: str, filter_value: str) -> list[str]:
    """Sorted, de-duplicated metric names whose label matches the filter."""
    if not filter_name:
        raise ValueError("filter_name must be nonempty")
    names = {
        name
        for (name, labels) in state.series_index
        if dict(labels).get(filter_name) == filter_value
    }
    return sorted(names)


def range_samples(
    state: SimState, metric_name: str, start_ts: float, end_ts: float
) -> RangeResult:
    """All samples with start <= t <= end, merged ascending across series."""
    if start_ts > end_ts:
        raise ValueError("start_ts must not exceed end_ts")
    found = False
    merged: list[tuple[float, float]] = []
    for (name, _), samples in state.series_index.items():
        if name != metric_name:
            continue
        found = True
        merged.extend(s for s in samples if start_ts <= s[0] <= end_ts)
    merged.sort(key=lambda s: s[0])
    return RangeResult(metric_found=found, samples=tuple(merged))


def irate_points(
    samples: list[tuple[float, float]] | tuple[tuple[float, float], ...],
) -> list[tuple[float, float]]:
    """Instantaneous rate between each adjacent sample pair.

    A value drop is treated as a counter reset: the rate becomes
    ``new_value / dt``. Output has one point per consecutive pair.
    """
    out: list[tuple[float, float]] = []
    for (t0, v0), (t1, v1) in zip(samples, samples[1:]):
        dt = t1 - t0
        if dt <= 0:
            raise ValueError("timestamps must strictly increase")
        rate = (v1 - v0) / dt if v1 >= v0 else v1 / dt
        out.append((t1, rate))
    return out
