import pytest

from mdgcluster.mdg import parse_mdg


@pytest.fixture
def two_module():
    """A <-> B, unit weights."""
    return parse_mdg("A B\nB A")


@pytest.fixture
def chain3():
    """A <-> B <-> C, unit weights."""
    return parse_mdg("A B\nB A\nB C\nC B")


@pytest.fixture
def triangle():
    """Fully connected two-way triangle, unit weights."""
    return parse_mdg("A B\nB A\nB C\nC B\nA C\nC A")
