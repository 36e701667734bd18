"""The ``bench`` command line: run sweeps, inspect fixtures and the suite."""

from __future__ import annotations

import sys
import time
from pathlib import Path

import click

from .config import ConfigError, ServiceConfig, load_service_config, make_backend, parse_clock
from .domain import FailureKind
from .engine import AgentLimits, MemoryPolicy
from .fixtures import FixtureError, bundled_fixture, load_fixture_file
from .harness import (
    ConfigurationError,
    SuiteRunConfig,
    aggregate,
    emit_reports,
    format_pct,
    run_benchmark,
)
from .simcluster import DEFAULT_TIMEZONE, build_state
from .suite import builtin_suite, load_suite_file
from .toolkit import DEFAULT_SEED, build_default_registry


@click.group()
def main() -> None:
    """AIOps assistant benchmark workbench."""


@main.command("run")
@click.option("--suite", "suite_src", default="builtin", show_default=True,
              help="suite YAML file or 'builtin'")
@click.option("--fixture", "fixture_src", default="builtin", show_default=True,
              help="fixture YAML file or 'builtin'")
@click.option("--backend", "backend_specs", multiple=True,
              default=("scripted:golden",), show_default=True,
              help="backend spec; repeatable (scripted:golden, "
                   "scripted:fault:<kind>, scripted:pack:<file>, http:<file>)")
@click.option("--reps", default=10, show_default=True, help="repetitions per query")
@click.option("--seed", default=DEFAULT_SEED, show_default=True,
              help="seed for the capacity planning search")
@click.option("--out", "out_dir", default="bench-out", show_default=True,
              help="report output directory")
@click.option("--format", "formats", default="csv,markdown,json", show_default=True,
              help="comma-separated report formats")
@click.option("--memory", type=click.Choice(["on", "off"]), default="off",
              show_default=True, help="inject prior turns into prompts")
@click.option("--workers", default=1, show_default=True,
              help="parallel (backend, query) cells")
@click.option("--clock", "clock_spec", default="fixed", show_default=True,
              help="'system', 'fixed', or 'fixed:<timestamp>'")
@click.option("--timezone", "tz_name", default=DEFAULT_TIMEZONE, show_default=True)
def run(suite_src, fixture_src, backend_specs, reps, seed, out_dir, formats,
        memory, workers, clock_spec, tz_name) -> None:
    """Run the benchmark sweep and write RQ1/RQ2/RQ3 reports."""
    started = time.perf_counter()
    try:
        suite = builtin_suite() if suite_src == "builtin" else load_suite_file(suite_src)
        fixture = (
            bundled_fixture() if fixture_src == "builtin"
            else load_fixture_file(fixture_src)
        )
        clock = parse_clock(clock_spec, tz_name)
        state = build_state(fixture, Path(out_dir) / "artifacts", clock)
        registry = build_default_registry(state, seed=seed)
        backends = [make_backend(spec) for spec in backend_specs]
        config = SuiteRunConfig(
            suite=suite,
            backends=backends,
            repetitions=reps,
            parallel_workers=workers,
            memory_policy=MemoryPolicy(enabled=(memory == "on")),
            limits=AgentLimits(),
        )
        records = run_benchmark(config, state, registry)
        report = aggregate(records, suite)
        written = emit_reports(report, out_dir, tuple(formats.split(",")))
    except (ConfigError, ConfigurationError, FixtureError) as exc:
        raise click.ClickException(str(exc)) from exc

    total = len(records)
    passed = sum(1 for r in records if r.success)
    expected = sum(1 for r in records if r.expected)
    unexpected_failures = sum(1 for r in records if not r.expected)
    click.echo(f"ran {total} agent runs in {time.perf_counter() - started:.1f}s")
    for backend in report.backend_ids:
        cells = [c for (qid, b), c in report.cells.items() if b == backend]
        mean_acc = sum(c.accuracy_pct for c in cells) / len(cells)
        click.echo(f"  {backend}: mean accuracy {format_pct(mean_acc)}% "
                   f"over {len(cells)} queries")
    click.echo(
        f"pass-rate (data, not exit status): {passed}/{total} successes, "
        f"{expected}/{total} as expected, {unexpected_failures} unexpected"
    )
    click.echo("reports: " + ", ".join(str(p) for p in written))


@main.command("validate-fixture")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def validate_fixture(path: str) -> None:
    """Parse and validate a fixture file."""
    try:
        fixture = load_fixture_file(path)
    except FixtureError as exc:
        raise click.ClickException(str(exc)) from exc
    namespaces = ", ".join(ns.name for ns in fixture.namespaces) or "(none)"
    series = sum(len(ns.metrics) for ns in fixture.namespaces)
    click.echo(f"ok: {len(fixture.namespaces)} namespace(s) [{namespaces}], "
               f"{series} metric series")


@main.command("show-suite")
@click.option("--suite", "suite_src", default="builtin", show_default=True)
def show_suite(suite_src: str) -> None:
    """Print the benchmark queries."""
    suite = builtin_suite() if suite_src == "builtin" else load_suite_file(suite_src)
    for case in suite:
        tools = ",".join(sorted(case.expected_tools)) or "-"
        click.echo(f"{case.id}  {case.category.value}  [{tools}]  {case.text}")


@main.command("serve")
@click.option("--config", "config_path", default=None,
              help="service config YAML (defaults apply when omitted)")
def serve(config_path: str | None) -> None:
    """Run the interactive agent chat service."""
    import uvicorn

    from .service import build_service, create_app

    config = load_service_config(config_path) if config_path else ServiceConfig()
    state = build_service(config)
    uvicorn.run(create_app(state), host=config.host, port=config.port)


if __name__ == "__main__":
    sys.exit(main())
