import pytest

from nopress.map import load_standard_map
from nopress.state import initial_state


@pytest.fixture(scope="session")
def std_map():
    return load_standard_map()


@pytest.fixture(scope="session")
def opening(std_map):
    return initial_state(std_map)
