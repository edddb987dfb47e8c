import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ddpce.ensemble import FitSettings, SplitPlan, train_ensemble
from ddpce.features import Dataset, sample_uniform
from ddpce.thermal import synthetic_oracle

ENSEMBLE_SIZES = (100, 400, 800)

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def oracle_dataset():
    y = sample_uniform(935, seed=2024)
    return Dataset(y, synthetic_oracle(y))


@pytest.fixture(scope="session")
def ensembles(oracle_dataset):
    """I = 100 sparse-adaptive ensembles at M = 100, 400, 800 with J = 135."""
    t0 = time.perf_counter()
    out = {M: train_ensemble(oracle_dataset, SplitPlan(11, 100, M, 135), FitSettings()) for M in ENSEMBLE_SIZES}
    return out, time.perf_counter() - t0


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[key])
