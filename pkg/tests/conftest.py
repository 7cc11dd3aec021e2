import pytest

from graphene_cp.graphene import GrapheneModel
from graphene_cp.rubidium import AtomicState, build_transition_table


@pytest.fixture(scope="session")
def graphene():
    return GrapheneModel()


@pytest.fixture(scope="session")
def ground_table():
    return build_transition_table(AtomicState.parse("5S1/2"))


@pytest.fixture(scope="session")
def rydberg_tables():
    return {n: build_transition_table(AtomicState(n, 0, 0.5)) for n in (26, 29, 32, 34)}


@pytest.fixture(scope="session")
def table32(rydberg_tables):
    return rydberg_tables[32]
