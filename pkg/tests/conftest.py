import os

import pytest
from hypothesis import HealthCheck, settings

from cmsquad import orthopoly, weightfn

settings.register_profile("default", max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

TEST_SPECS = {
    "constant": weightfn.constant_weight,
    "ramp": weightfn.ramp_weight,
    "step": weightfn.step_weight,
}


@pytest.fixture(params=sorted(TEST_SPECS))
def spec(request):
    return TEST_SPECS[request.param]()


@pytest.fixture
def ramp():
    return weightfn.ramp_weight()


@pytest.fixture
def step():
    return weightfn.step_weight()


@pytest.fixture
def unit():
    return weightfn.constant_weight()


@pytest.fixture(scope="session")
def table_cache():
    cache = {}

    def get(spec, n):
        key = (spec, n)
        if key not in cache:
            cache[key] = orthopoly.build_tables(spec, n)
        return cache[key]

    return get


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(capsys):
    """Record and print one PASS/FAIL line for an acceptance criterion."""

    def record(number, passed, detail):
        line = f"ACCEPTANCE {number:>2} {'PASS' if passed else 'FAIL'}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
