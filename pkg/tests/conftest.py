"""Shared fixtures and the opt-in switch for long statistical batteries"""
import numpy as np
import pytest

from dqeo.models import CVaRConfig, GradFreeConfig, PreconditionConfig


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow statistical batteries")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long statistical battery, runs only with --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_precondition():
    """Cheap preconditioner settings for K <= 3 registers"""
    return PreconditionConfig(
        layers=3,
        cvar=CVaRConfig(shots=200, alpha=0.1),
        gradfree=GradFreeConfig(max_evals=40),
    )
