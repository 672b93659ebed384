import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rdfronts import Potential, Reaction, make_transverse

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("repo")

ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split(".")[0]), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def kpp():
    return Reaction.kpp()


@pytest.fixture
def cubic():
    return Reaction.bistable(0.25)


@pytest.fixture
def quadratic():
    return Potential.quadratic()


@pytest.fixture
def line10():
    """Full-line transverse grid on [-10, 10], spacing 0.05."""
    return make_transverse(1, 10.0, 401)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
