import numpy as np
import pytest

from homocone import cone_zoo
from homocone.triangular_group import random_element, rho_apply, rho_star_map

ZOO = ["sym2", "sym3", "lorentz3", "vinberg"]
REGULAR_S = {"sym1": [2.0], "sym2": [2.0, 2.0], "sym3": [2.0, 2.0, 2.0], "lorentz3": [1.0, 2.0],
             "vinberg": [1.0, 1.0, 2.0]}


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def sym1():
    return cone_zoo.sym_cone(1)


@pytest.fixture
def sym2():
    return cone_zoo.sym_cone(2)


@pytest.fixture
def sym3():
    return cone_zoo.sym_cone(3)


@pytest.fixture
def lorentz3():
    return cone_zoo.lorentz_cone(3)


@pytest.fixture
def vinberg():
    return cone_zoo.vinberg_cone()


@pytest.fixture
def half_lines():
    return cone_zoo.half_line_pair()


@pytest.fixture
def chain():
    return cone_zoo.chain_cone()


@pytest.fixture(params=ZOO)
def zoo_cone(request):
    return cone_zoo.by_name(request.param)


@pytest.fixture
def interior_point():
    """Returns a function drawing rho(S) I for a random S."""
    def draw(structure, rng):
        return rho_apply(random_element(structure, rng), structure.identity())
    return draw


@pytest.fixture
def dual_point():
    """Returns a function drawing rho*(S) I for a random S."""
    def draw(structure, rng):
        return rho_star_map(random_element(structure, rng)).apply(structure.identity())
    return draw
