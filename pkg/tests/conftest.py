import pytest

from it2aqi.fahp import default_matrix, default_weights
from it2aqi.it2core import default_table
from it2aqi.kgraph import fixture_text, load_store, materialize, parse_rules


@pytest.fixture(scope="session")
def table():
    return default_table()


@pytest.fixture(scope="session")
def matrix():
    return default_matrix()


@pytest.fixture(scope="session")
def weights():
    return default_weights()


@pytest.fixture(scope="session")
def horn_rules():
    return parse_rules(fixture_text("swrl_rules.txt"))


@pytest.fixture
def demo_store():
    return load_store(fixture_text("demo_kb.nt"))


@pytest.fixture(scope="session")
def demo_inferred(horn_rules):
    return materialize(load_store(fixture_text("demo_kb.nt")), horn_rules).store
