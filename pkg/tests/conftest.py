import pytest

from eightblocks.varieties import catalog


@pytest.fixture(scope="session")
def cat():
    return catalog()
