import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from chiral_skyrmion.analysis import invert_relation, perturbation_record
from chiral_skyrmion.checks import SWEEP_K
from chiral_skyrmion.model import ModelParams
from chiral_skyrmion.solver import continuation, solve_newton

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def solved_k01():
    params = ModelParams(0.1, 0.0, invert_relation(0.1))
    return solve_newton(params)


@pytest.fixture(scope="session")
def sweep():
    """alpha -> (reports, records) for the standard k sweep."""
    out = {}
    for alpha in (0.0, 1.0, -1.0):
        reports = continuation(SWEEP_K, alpha)
        records = [perturbation_record(r.profile, r.params, r.energies.total) for r in reports]
        out[alpha] = (reports, records)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def log_inv(x):
    return math.log(1.0 / x)


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
