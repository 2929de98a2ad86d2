import pytest

from encirc import LweParams, OracleBootstrapEngine, ReferenceEngine, keygen


@pytest.fixture(scope="session")
def params():
    return LweParams()


@pytest.fixture(scope="session")
def key(params):
    return keygen(params, seed=11)


@pytest.fixture
def ref(params):
    return ReferenceEngine(params)


@pytest.fixture
def orc(key):
    return OracleBootstrapEngine(key, seed=11)


@pytest.fixture
def engines(ref, orc):
    return (ref, orc)
