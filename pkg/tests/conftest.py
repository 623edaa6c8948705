import math
import time

import pytest

from conformal_mass.blowup import compute_fields
from conformal_mass.greensolve import solve_green
from conformal_mass.profiles import fubini_study_profile, perturbed_s4_profile, round_s4_profile

PI2 = math.pi**2


@pytest.fixture(scope="session")
def round_profile():
    return round_s4_profile()


@pytest.fixture(scope="session")
def fs_profile():
    return fubini_study_profile()


@pytest.fixture(scope="session")
def perturbed_profile():
    return perturbed_s4_profile(0.1)


@pytest.fixture(scope="session")
def round_sol(round_profile):
    return solve_green(round_profile, n=4096)


@pytest.fixture(scope="session")
def fs_sol(fs_profile):
    return solve_green(fs_profile, n=4096)


@pytest.fixture(scope="session")
def perturbed_sol(perturbed_profile):
    return solve_green(perturbed_profile, n=4096)


@pytest.fixture(scope="session")
def round_fields(round_profile, round_sol):
    return compute_fields(round_profile, round_sol)


@pytest.fixture(scope="session")
def fs_fields(fs_profile, fs_sol):
    return compute_fields(fs_profile, fs_sol)


@pytest.fixture(scope="session")
def perturbed_fields(perturbed_profile, perturbed_sol):
    return compute_fields(perturbed_profile, perturbed_sol)


# acceptance reporting: one line per criterion, repeated in the terminal summary

SUITE_BUDGET_S = 60.0


def pytest_sessionstart(session):
    session.config._t0 = time.perf_counter()
    session.config._criteria = []


@pytest.fixture
def criterion(request):
    """criterion(label, ok, detail) prints and records a PASS/FAIL line, then asserts ok."""
    def check(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {label}: {detail}"
        print(line)
        request.config._criteria.append(line)
        assert ok, line
    return check


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - session.config._t0
    session.config._elapsed = elapsed
    if session.config._criteria and elapsed >= SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_criteria", [])
    if not lines:
        return
    elapsed = getattr(config, "_elapsed", time.perf_counter() - config._t0)
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
    ok = elapsed < SUITE_BUDGET_S
    terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion 9 (suite runtime): "
                                f"{elapsed:.1f} s < {SUITE_BUDGET_S:.0f} s")
