import pytest

from opsbench.fixtures import bundled_fixture
from opsbench.harness import DEFAULT_CLOCK_TS, resolve_suite
from opsbench.scripted import golden_backend
from opsbench.simcluster import Clock, build_state
from opsbench.suite import builtin_suite
from opsbench.toolkit import build_default_registry

REFERENCE_TS = DEFAULT_CLOCK_TS  # 1730500568.411993


@pytest.fixture()
def demo_state(tmp_path):
    return build_state(
        bundled_fixture(), tmp_path / "artifacts", Clock.fixed(REFERENCE_TS)
    )


@pytest.fixture()
def registry(demo_state):
    return build_default_registry(demo_state)


@pytest.fixture()
def golden():
    return golden_backend()


@pytest.fixture()
def resolved_suite(demo_state):
    return resolve_suite(builtin_suite(), demo_state.fixture)


@pytest.fixture()
def query_by_id(resolved_suite):
    return {case.id: case for case in resolved_suite}
