import itertools

import numpy as np
import pytest

from homocone.cone_model import inner_product
from homocone.errors import NotInCone, NotInDualCone, PreconditionViolation, StructureLeak
from homocone.power_riesz import sign_matrix
from homocone.triangular_group import (LinearMap, TriangularElement, character, cholesky_structured, compose,
                                       diagonal_element, dual_decompose, identity_element, inverse,
                                       random_element, rho_apply, rho_map, rho_star_apply, rho_star_map,
                                       scalar_map, signed_cholesky, signed_dual_decompose, triangular_element)


def test_element_needs_positive_diagonal(sym2):
    with pytest.raises(PreconditionViolation):
        TriangularElement(sym2, [1.0, 0.0, 0.5])
    with pytest.raises(ValueError):
        TriangularElement(sym2, [1.0, 1.0])


def test_embedding(vinberg):
    T = triangular_element(vinberg, [2.0, 3.0, 4.0], {(3, 1): [0.5], (3, 2): [-1.0]})
    L = T.matrix
    assert np.allclose(L, [[2.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.5, -1.0, 4.0]])
    assert not T.is_diagonal()
    assert identity_element(vinberg).is_diagonal()


def test_compose_inverse(zoo_cone, rng):
    S = random_element(zoo_cone, rng)
    T = random_element(zoo_cone, rng)
    ST = compose(S, T)
    assert np.allclose(ST.matrix, S.matrix @ T.matrix)
    back = compose(S, inverse(S))
    assert np.allclose(back.vector, zoo_cone.identity().vector, atol=1e-12)


def test_structure_leak(chain):
    S = triangular_element(chain, [1.0, 1.0, 1.0], {(3, 2): [1.0]})
    T = triangular_element(chain, [1.0, 1.0, 1.0], {(2, 1): [1.0]})
    with pytest.raises(StructureLeak):
        compose(S, T)


def test_rho_map_matches_rho_apply(zoo_cone, rng, interior_point):
    T = random_element(zoo_cone, rng)
    x = interior_point(zoo_cone, rng)
    assert np.allclose(rho_map(T).apply(x).vector, rho_apply(T, x).vector)


def test_rho_star_is_adjoint(zoo_cone, rng):
    T = random_element(zoo_cone, rng)
    x = zoo_cone.element(rng.normal(size=zoo_cone.dim))
    xi = zoo_cone.element(rng.normal(size=zoo_cone.dim))
    lhs = inner_product(rho_apply(T, x), xi)
    rhs = inner_product(x, rho_star_apply(T, xi))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_linear_map_algebra(vinberg, rng):
    S = random_element(vinberg, rng)
    T = random_element(vinberg, rng)
    product = rho_map(S) @ rho_map(T)
    assert product.kind == "rho"
    assert np.allclose(product.matrix, rho_map(S).matrix @ rho_map(T).matrix)
    inv = rho_map(S).inverse()
    assert np.allclose(inv.matrix @ rho_map(S).matrix, np.eye(vinberg.dim), atol=1e-12)
    assert rho_map(S).adjoint().kind == "rho_star"
    twice = scalar_map(vinberg, 2.0) @ scalar_map(vinberg, 3.0)
    assert twice.kind == "scalar"
    assert twice.element == 6.0
    mixed = scalar_map(vinberg, 2.0) @ rho_map(S)
    assert mixed.kind == "generic"
    stack = rng.normal(size=(4, vinberg.dim))
    applied = rho_map(S).apply_vectors(stack)
    for row, v in zip(applied, stack):
        assert np.allclose(row, rho_apply(S, vinberg.element(v)).vector)
    with pytest.raises(ValueError):
        LinearMap(vinberg, np.eye(2))


def test_cholesky_round_trip(zoo_cone, rng):
    for _ in range(100):
        S = random_element(zoo_cone, rng)
        x = rho_apply(S, zoo_cone.identity())
        T = cholesky_structured(x)
        assert np.allclose(T.vector, S.vector, atol=1e-9)
        assert np.allclose(rho_apply(T, zoo_cone.identity()).vector, x.vector, atol=1e-9)


def test_cholesky_outside_cone(sym2, lorentz3):
    with pytest.raises(NotInCone):
        cholesky_structured(-sym2.identity())
    # x1 x2 < |a|^2
    with pytest.raises(NotInCone):
        cholesky_structured(lorentz3.element([1.0, 1.0, 1.0, 1.0, 0.0]))


def test_dual_decompose_diagonal(sym2):
    T = dual_decompose(sym2.element([4.0, 9.0, 0.0]))
    assert np.allclose(T.vector, [2.0, 3.0, 0.0], atol=1e-12)


def test_dual_decompose_round_trip(zoo_cone, rng):
    for _ in range(100):
        S = random_element(zoo_cone, rng)
        xi = rho_star_map(S).apply(zoo_cone.identity())
        T, info = dual_decompose(xi, return_info=True)
        assert info["residual"] <= 1e-8
        assert np.allclose(T.vector, S.vector, atol=1e-8)


def test_dual_decompose_outside(sym2):
    with pytest.raises(NotInDualCone):
        dual_decompose(-sym2.identity())
    # positive diagonal, but [[1, 2], [2, 1]] is indefinite
    with pytest.raises(NotInDualCone):
        dual_decompose(sym2.element([1.0, 1.0, 2.0]))


@pytest.mark.parametrize("name", ["sym3", "vinberg"])
def test_signed_decompositions(name, rng):
    from homocone import cone_zoo
    c = cone_zoo.by_name(name)
    for eps in itertools.product((1, -1), repeat=c.r):
        S = random_element(c, rng)
        E = sign_matrix(c, eps)
        T, found = signed_cholesky(rho_apply(S, E))
        assert found == eps
        assert np.allclose(T.vector, S.vector, atol=1e-9)
        T, found = signed_dual_decompose(rho_star_map(S).apply(E))
        assert found == eps
        assert np.allclose(T.vector, S.vector, atol=1e-9)


def test_signed_decomposition_agrees_with_newton(vinberg, rng, dual_point):
    xi = dual_point(vinberg, rng)
    T, eps = signed_dual_decompose(xi)
    assert eps == (1, 1, 1)
    assert np.allclose(T.vector, dual_decompose(xi).vector, atol=1e-9)


def test_vanishing_pivot(sym2):
    with pytest.raises(PreconditionViolation):
        signed_cholesky(sym2.element([0.0, 1.0, 0.0]))


def test_character(sym2, vinberg, rng):
    T = diagonal_element(sym2, [2.0, 1.0])
    assert character([2.0, 2.0], T) == pytest.approx(16.0)
    S = random_element(vinberg, rng)
    T = random_element(vinberg, rng)
    s = [0.3, -1.2, 2.0]
    assert character(s, compose(S, T)) == pytest.approx(character(s, S) * character(s, T), rel=1e-12)
    with pytest.raises(ValueError):
        character([1.0], T)
