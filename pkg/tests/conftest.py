import numpy as np
import pytest

from gcflow import fibration as fib
from gcflow import geometry as geo

SCAN_SAMPLES = 200
SCAN_SEED = 7


@pytest.fixture(scope="session")
def scans():
    """Defect scans per valid fixture, computed once for the whole session."""
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = geo.defect_scan(fib.FIXTURES[name], SCAN_SAMPLES, SCAN_SEED)
        return cache[name]

    return get


@pytest.fixture(scope="session")
def map_classes():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = fib.classify_map(fib.FIXTURES[name], SCAN_SAMPLES)
        return cache[name]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
