import numpy as np
import pytest

from anchorlab.geometry import AnchorSet, default_trajectory

AP1 = [(0.0, 100.0), (0.0, 0.0), (100.0, 0.0)]
AP2 = [(0.0, 100.0), (7.0, 50.0), (3.0, 40.0)]
AP3 = [(0.0, 0.0), (100.0, 0.0), (100.0, 100.0)]


@pytest.fixture
def ap1():
    return AnchorSet.from_points(AP1)


@pytest.fixture
def ap2():
    return AnchorSet.from_points(AP2)


@pytest.fixture(scope="session")
def ht():
    return default_trajectory()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
