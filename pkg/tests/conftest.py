"""
Shared fixtures: canonical levels, default tolerances, isolated singletons
"""
import pytest

from core.properties_configurator import PropertiesConfigurator
from pwcycles.hamiltonian_family import (
    build_h0, build_level, canonical_level0, default_epsilon_vector, default_tables,
)
from pwcycles.tolerances import DEFAULT_TOLERANCES
from tools.tools_registry import ToolsRegistry

CANONICAL_EPSILON = 1e-3
LEVEL1_VECTOR = default_epsilon_vector(1)


@pytest.fixture(autouse=True)
def fresh_singletons():
    PropertiesConfigurator.reset()
    ToolsRegistry.reset()
    yield
    PropertiesConfigurator.reset()
    ToolsRegistry.reset()


@pytest.fixture
def tol():
    return DEFAULT_TOLERANCES


@pytest.fixture
def level0():
    return build_h0(canonical_level0(), CANONICAL_EPSILON)


@pytest.fixture
def level1():
    return build_level(1, CANONICAL_EPSILON, LEVEL1_VECTOR, default_tables(1))


@pytest.fixture
def out_dir(tmp_path):
    return str(tmp_path / "out")
