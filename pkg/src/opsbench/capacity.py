"""Capacity-planning search for the simulated WireMock workload.

A closed-form surrogate predicts the throughput KPI of a parameter
configuration; a seeded random search looks for a configuration whose
predicted KPI falls inside the requested precision band.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

PARAM_BOUNDS = {
    "async_response_threads": (10, 400),
    "container_cpu": (0.5, 4.0),
    "container_memory_mb": (256, 4096),
    "jvm_heap_mb": (128, 2048),
}


@dataclass(frozen=True)
class CapacityConfig:
    """One parameter configuration with its predicted KPI."""

    async_response_threads: int
    container_cpu: float
    container_memory_mb: int
    jvm_heap_mb: int
    predicted_kpi: float

    def __post_init__(self) -> None:
        lo, hi = PARAM_BOUNDS["async_response_threads"]
        if not lo <= self.async_response_threads <= hi:
            raise ValueError("async_response_threads out of bounds")
        lo, hi = PARAM_BOUNDS["container_cpu"]
        if not lo <= self.container_cpu <= hi:
            raise ValueError("container_cpu out of bounds")
        lo, hi = PARAM_BOUNDS["container_memory_mb"]
        if not lo <= self.container_memory_mb <= hi:
            raise ValueError("container_memory_mb out of bounds")
        lo, hi = PARAM_BOUNDS["jvm_heap_mb"]
        if not lo <= self.jvm_heap_mb <= hi:
            raise ValueError("jvm_heap_mb out of bounds")


@dataclass(frozen=True)
class SearchResult:
    config: CapacityConfig
    within_precision: bool
    epochs_used: int


def surrogate_kpi(
    async_response_threads: int,
    container_cpu: float,
    container_memory_mb: int,
    jvm_heap_mb: int,
) -> float:
    """Predicted throughput KPI of a configuration."""
    return (
        12.0 * math.log(1.0 + async_response_threads)
        + 35.0 * container_cpu
        + 0.04 * jvm_heap_mb
        + 0.01 * container_memory_mb
    )


def _draw(rng: random.Random) -> CapacityConfig:
    threads = rng.randint(*PARAM_BOUNDS["async_response_threads"])
    cpu = rng.uniform(*PARAM_BOUNDS["container_cpu"])
    memory = rng.randint(*PARAM_BOUNDS["container_memory_mb"])
    heap = rng.randint(*PARAM_BOUNDS["jvm_heap_mb"])
    return CapacityConfig(
        async_response_threads=threads,
        container_cpu=cpu,
        container_memory_mb=memory,
        jvm_heap_mb=heap,
        predicted_kpi=surrogate_kpi(threads, cpu, memory, heap),
    )


def search_capacity_config(
    target_kpi: float, precision_pct: float, epochs: int, seed: int
) -> SearchResult:
    """Draw configurations until one predicts a KPI inside the band.

    Returns the first configuration within
    ``[target*(1 - precision_pct/100), target*(1 + precision_pct/100)]``,
    or the closest-by-absolute-error draw flagged ``within_precision=False``.
    """
    if target_kpi <= 0:
        raise ValueError("target_kpi must be positive")
    if precision_pct < 0:
        raise ValueError("precision_pct must be nonnegative")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")

    band = target_kpi * precision_pct / 100.0
    rng = random.Random(seed)
    best: CapacityConfig | None = None
    best_err = math.inf
    for epoch in range(1, epochs + 1):
        config = _draw(rng)
        err = abs(config.predicted_kpi - target_kpi)
        if err <= band:
            return SearchResult(config=config, within_precision=True, epochs_used=epoch)
        if err < best_err:
            best, best_err = config, err
    assert best is not None
    return SearchResult(config=best, within_precision=False, epochs_used=epochs)
