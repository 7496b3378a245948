import pytest

from chiraltrain.molecule import get_preset


@pytest.fixture(scope="session")
def n14():
    return get_preset("n14n2")


@pytest.fixture(scope="session")
def n15():
    return get_preset("n15n2")


@pytest.fixture(scope="session")
def o2():
    return get_preset("o16o2")
