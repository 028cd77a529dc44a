import pytest

from anticyclo_h10.curves import WeierstrassModel
from anticyclo_h10.interface import bundled_externals, bundled_fixtures
from anticyclo_h10.numberfield import ImagQuadField


@pytest.fixture(scope="session")
def fixtures():
    return bundled_fixtures()


@pytest.fixture(scope="session")
def E1(fixtures) -> WeierstrassModel:
    return fixtures["56b1"].model


@pytest.fixture(scope="session")
def E2(fixtures) -> WeierstrassModel:
    return fixtures["392c1"].model


@pytest.fixture(scope="session")
def K5() -> ImagQuadField:
    return ImagQuadField(5)


@pytest.fixture(scope="session")
def externals():
    return bundled_externals()
