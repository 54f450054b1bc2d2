import json
from fractions import Fraction
from pathlib import Path

import pytest
from click.testing import CliRunner
from hypothesis import strategies as st

from borel_invariants.exactmat import Matrix
from borel_invariants.logging import logger

GOLDEN_PATH = Path(__file__).parent / "data" / "golden"
# Keeps property-test determinants small enough to stay fast.
SMALL_INTEGERS = st.integers(min_value=-9, max_value=9)
rationals = st.builds(Fraction, SMALL_INTEGERS, st.integers(min_value=1, max_value=9))


def square_matrices(n: int):
    return st.lists(
        st.lists(rationals, min_size=n, max_size=n), min_size=n, max_size=n
    ).map(Matrix)


@pytest.fixture(autouse=True)
def reset_log_level():
    level = logger.level
    yield
    logger.setLevel(level)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def golden():
    def fn(name: str) -> str:
        return (GOLDEN_PATH / name).read_text()

    return fn


@pytest.fixture
def write_matrix(tmp_path):
    def fn(rows, name: str = "m.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(rows))
        return path

    return fn


@pytest.fixture
def x2():
    """[[a, b], [c, d]] = [[1, 2], [3, 4]]."""
    return Matrix([[1, 2], [3, 4]])


@pytest.fixture
def x3():
    return Matrix([[2, -1, 3], [1, 4, -2], [5, 1, 1]])


@pytest.fixture
def x4():
    return Matrix(
        [
            [1, 2, -1, 3],
            [Fraction(1, 2), -3, 2, 1],
            [4, 1, Fraction(-2, 3), 5],
            [2, -1, 3, 7],
        ]
    )
