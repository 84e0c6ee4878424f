import pytest

from toric_coherent.chain_complex import LatticeGeometry
from toric_coherent.enumerator import all_syndrome_tables


@pytest.fixture(scope="session")
def geom2():
    return LatticeGeometry(2)


@pytest.fixture(scope="session")
def geom3():
    return LatticeGeometry(3)


@pytest.fixture(scope="session")
def tables2(geom2):
    return [t for _, t in all_syndrome_tables(geom2)]


@pytest.fixture(scope="session")
def tables3(geom3):
    return [t for _, t in all_syndrome_tables(geom3)]
