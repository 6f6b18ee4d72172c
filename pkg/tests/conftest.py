import pytest
from hypothesis import settings

from semilinear import Annulus, Disk, Rectangle, build_grid

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")


@pytest.fixture(scope="session")
def unit_disk():
    return Disk((0.0, 0.0), 1.0)


@pytest.fixture(scope="session")
def disk_grid(unit_disk):
    return build_grid(unit_disk, 0.1)


@pytest.fixture(scope="session")
def annulus():
    return Annulus((0.0, 0.0), 1.0, 2.0)


@pytest.fixture(scope="session")
def square_grid():
    return build_grid(Rectangle(0.0, 1.0, 0.0, 1.0), 0.125)
