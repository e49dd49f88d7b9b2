import json

import numpy as np
import pytest

from homocone import cone_zoo
from homocone.config import Settings
from homocone.errors import (DegenerateScale, InconsistentCharacter, NotInGindikinSet, OutOfDomain,
                             PreconditionViolation)
from homocone.nef_invariance import (NEFDescriptor, characterization_audit, cocycle_from_descriptor, cocycle_laws,
                                     cumulant, cumulant_hessian, extract_theta0, in_domain, invariance_check,
                                     laplace, mean, measured_constant, pushforward_parameter, recover_parameter,
                                     sample_family)
from homocone.triangular_group import (LinearMap, character, diagonal_element, identity_map, random_element,
                                       rho_map, rho_star_map, scalar_map)

from .conftest import REGULAR_S


def test_descriptor_validation(sym2):
    with pytest.raises(NotInGindikinSet):
        NEFDescriptor(sym2, [0.25, 0.25])
    with pytest.raises(PreconditionViolation):
        NEFDescriptor(sym2, [0.0, 1.0])
    d = NEFDescriptor(sym2, [2.0, 2.0], a0=0.5)
    assert d.sign == 1.0
    assert np.array_equal(d.theta0.vector, np.zeros(3))
    assert d.to_dict() == {"cone": "sym2", "s": [2.0, 2.0], "theta0": [0.0, 0.0, 0.0], "a0": 0.5,
                           "reflected": False}


def test_laplace_at_shifted_identity(vinberg):
    theta0 = vinberg.from_blocks([0.5, -0.2, 0.1], {(3, 1): [0.3]})
    d = NEFDescriptor(vinberg, [1.0, 1.0, 2.0], theta0=theta0, a0=1.5)
    assert laplace(d, theta0 - vinberg.identity()) == pytest.approx(np.exp(1.5))


def test_laplace_scaling(sym2):
    p = 1.5
    d = NEFDescriptor(sym2, [p, p])
    ratio = laplace(d, -2.0 * sym2.identity()) / laplace(d, -sym2.identity())
    assert ratio == pytest.approx(2.0 ** (-2.0 * p))


def test_outside_domain(sym2):
    d = NEFDescriptor(sym2, [2.0, 2.0])
    with pytest.raises(OutOfDomain):
        cumulant(d, sym2.identity())
    assert not in_domain(d, sym2.identity())
    assert in_domain(d, -sym2.identity())
    reflected = NEFDescriptor(sym2, [2.0, 2.0], reflected=True)
    assert in_domain(reflected, sym2.identity())
    assert not in_domain(reflected, -sym2.identity())


@pytest.mark.parametrize("t", [0.5, 1.0, 3.0])
def test_mean_on_half_line(sym1, t):
    d = NEFDescriptor(sym1, [2.0])
    m = mean(d, sym1.element([-t]))
    assert m.vector[0] == pytest.approx(2.0 / t, rel=1e-7)


def test_mean_lies_in_cone(vinberg):
    d = NEFDescriptor(vinberg, REGULAR_S["vinberg"])
    m = mean(d, -vinberg.identity())
    assert np.min(np.linalg.eigvalsh(m.matrix)) > 0


def test_central_difference_is_second_order(sym1):
    d = NEFDescriptor(sym1, [2.0])
    theta = sym1.element([-1.0])
    exact = 2.0
    h = 0.05
    coarse = abs(mean(d, theta, step=h).vector[0] - exact)
    fine = abs(mean(d, theta, step=h / 2.0).vector[0] - exact)
    assert 3.5 < coarse / fine < 4.5


def test_hessian_is_positive(lorentz3):
    d = NEFDescriptor(lorentz3, REGULAR_S["lorentz3"])
    H = cumulant_hessian(d, -lorentz3.identity())
    assert np.allclose(H, H.T)
    assert np.min(np.linalg.eigvalsh(H)) > -1e-6


def test_invariance(sym2, vinberg, rng):
    d = NEFDescriptor(sym2, [2.0, 2.0])
    result = invariance_check(d, diagonal_element(sym2, [2.0, 1.0]), -sym2.identity())
    assert result.c_g == pytest.approx(16.0)
    assert result.lhs == pytest.approx(result.rhs, rel=1e-9)
    d = NEFDescriptor(vinberg, [1.0, 1.5, 2.0])
    T = random_element(vinberg, rng)
    theta = -(rho_star_map(random_element(vinberg, rng)).apply(vinberg.identity()))
    result = invariance_check(d, T, theta)
    assert result.lhs == pytest.approx(result.rhs, rel=1e-8)
    assert measured_constant(d, T) == pytest.approx(character(d.s, T), rel=1e-8)


def test_cocycle_closed_forms(vinberg, rng):
    theta0 = vinberg.from_blocks([0.3, 0.1, -0.2], {(3, 2): [0.4]})
    d = NEFDescriptor(vinberg, [1.0, 1.0, 2.0], theta0=theta0)
    record = cocycle_from_descriptor(d, identity_map(vinberg))
    assert record.b == 0.0
    assert np.allclose(record.a.vector, 0.0)
    record = cocycle_from_descriptor(d, scalar_map(vinberg, 2.0))
    assert record.b == pytest.approx(-4.0 * np.log(2.0))
    assert np.allclose(record.a.vector, theta0.vector / 2.0)
    T = random_element(vinberg, rng)
    record = cocycle_from_descriptor(d, rho_map(T))
    assert record.c == pytest.approx(character(d.s, T))
    # the same map without its kind goes through the Laplace probe
    generic = cocycle_from_descriptor(d, LinearMap(vinberg, rho_map(T).matrix))
    assert generic.b == pytest.approx(record.b, abs=1e-8)
    assert np.allclose(generic.a.vector, record.a.vector)
    with pytest.raises(TypeError):
        cocycle_from_descriptor(d, T)


def test_cocycle_laws(vinberg, rng):
    theta0 = vinberg.from_blocks([0.3, 0.1, -0.2], {(3, 1): [0.4]})
    d = NEFDescriptor(vinberg, [1.0, 1.0, 2.0], theta0=theta0)
    g = rho_map(random_element(vinberg, rng))
    gp = rho_map(random_element(vinberg, rng))
    report = cocycle_laws(cocycle_from_descriptor(d, g), cocycle_from_descriptor(d, gp),
                          cocycle_from_descriptor(d, g @ gp))
    assert report.passed
    c = scalar_map(vinberg, 1.7)
    report = cocycle_laws(cocycle_from_descriptor(d, c), cocycle_from_descriptor(d, gp),
                          cocycle_from_descriptor(d, c @ gp), Settings(cocycle_tol=1e-7))
    assert report.passed


def test_extract_theta0(lorentz3):
    theta0 = lorentz3.from_blocks([0.5, -0.3], {(2, 1): [0.1, 0.2, -0.1]})
    d = NEFDescriptor(lorentz3, REGULAR_S["lorentz3"], theta0=theta0)
    for c in (0.5, 2.0, 3.0):
        record = cocycle_from_descriptor(d, scalar_map(lorentz3, c))
        assert np.allclose(extract_theta0(record.a, c).vector, theta0.vector)
    with pytest.raises(DegenerateScale):
        extract_theta0(theta0, 1.0)
    with pytest.raises(PreconditionViolation):
        extract_theta0(theta0, -2.0)


def test_recover_parameter(vinberg):
    s = [1.0, 1.5, 2.5]
    recovered = recover_parameter(vinberg, lambda T: character(s, T))
    assert np.allclose(recovered.s, s)
    assert recovered.classification == (1, 1, 1)
    with pytest.raises(InconsistentCharacter):
        recover_parameter(vinberg, lambda T: character(s, T) + 1.0)
    with pytest.raises(InconsistentCharacter):
        recover_parameter(vinberg, lambda T: -1.0)


def test_reflection_symmetry(sym2):
    theta0 = sym2.from_blocks([0.2, -0.1], {(2, 1): [0.05]})
    d = NEFDescriptor(sym2, [2.0, 2.0], theta0=theta0)
    r = d.reflection()
    assert r.reflected
    assert np.array_equal(r.theta0.vector, -theta0.vector)
    for t in (1.0, 2.0):
        theta = theta0 - t * sym2.identity()
        assert laplace(r, -theta) == laplace(d, theta)


def test_pushforward_parameter(sym2):
    d = NEFDescriptor(sym2, [2.0, 2.0])
    g = rho_map(diagonal_element(sym2, [2.0, 1.0]))
    moved = pushforward_parameter(d, g, -sym2.identity())
    assert np.allclose(moved.vector, [-0.25, -1.0, 0.0])


def test_sample_family(sym2):
    d = NEFDescriptor(sym2, [2.0, 2.0], reflected=True)
    batch = sample_family(d, sym2.identity(), n=500, seed=3)
    assert np.all(batch.vectors[:, :2] < 0)
    assert np.max(np.linalg.eigvalsh(batch.matrices())) <= 1e-9
    with pytest.raises(OutOfDomain):
        sample_family(d, -sym2.identity(), n=10)


def test_quick_audit(sym2):
    report = characterization_audit(sym2, [2.0, 2.0], n=2000, seed=5)
    assert report["orbit"].passed
    assert report["convexity"].passed
    assert report["convexity"].metrics["bridges_checked"] == 2
    assert report["parameter"].passed
    assert report["parameter"].metrics["recovered"] == pytest.approx([2.0, 2.0])
    as_json = json.loads(report.to_json())
    assert as_json["cone"] == "sym2"
    assert [step["name"] for step in as_json["steps"]] == ["orbit", "convexity", "parameter", "monte_carlo"]


def test_audit_reports_missing_bridge(half_lines):
    report = characterization_audit(half_lines, [1.0, 1.0], n=1000, seed=6)
    assert not report.passed
    step = report["convexity"]
    assert not step.passed
    assert step.metrics["error"] == "NoBridge"
    assert step.metrics["no_bridge"] == [[1, -1], [-1, 1]]
    assert report["orbit"].passed
    assert step in report.failures()


@pytest.mark.slow
def test_audit_sym2():
    c = cone_zoo.sym_cone(2)
    report = characterization_audit(c, [2.0, 2.0], theta0=-c.identity(), n=100000, seed=42)
    assert report.passed, report.to_json()


@pytest.mark.slow
@pytest.mark.parametrize("reflected", [False, True])
def test_audit_vinberg(reflected):
    c = cone_zoo.vinberg_cone()
    report = characterization_audit(c, [1.0, 1.0, 2.0], reflected=reflected, n=100000, seed=42)
    assert report.passed, report.to_json()


@pytest.mark.parametrize("name", ["sym2", "vinberg"])
def test_cocycle_laws_over_random_pairs(name, rng):
    c = cone_zoo.by_name(name)
    theta0 = c.element(rng.normal(scale=0.3, size=c.dim))
    d = NEFDescriptor(c, REGULAR_S[name], theta0=theta0)
    pool = [scalar_map(c, 0.5), scalar_map(c, 2.0), scalar_map(c, 3.0)]
    for _ in range(25):
        g, gp = [pool[i] if i < len(pool) else rho_map(random_element(c, rng))
                 for i in rng.integers(0, 2 * len(pool), size=2)]
        report = cocycle_laws(cocycle_from_descriptor(d, g), cocycle_from_descriptor(d, gp),
                              cocycle_from_descriptor(d, g @ gp))
        assert report.passed, report


def test_theta0_round_trip(vinberg, rng):
    for _ in range(50):
        theta0 = vinberg.element(rng.normal(size=vinberg.dim))
        d = NEFDescriptor(vinberg, REGULAR_S["vinberg"], theta0=theta0)
        for c in (2.0, 0.5, 3.0):
            a = cocycle_from_descriptor(d, scalar_map(vinberg, c)).a
            assert np.max(np.abs(extract_theta0(a, c).vector - theta0.vector)) <= 1e-10


def test_recover_from_descriptor(zoo_cone, rng):
    s = rng.uniform(0.6, 1.0, size=zoo_cone.r) + np.arange(zoo_cone.r)
    d = NEFDescriptor(zoo_cone, s)
    recovered = recover_parameter(zoo_cone, lambda T: measured_constant(d, T))
    assert np.max(np.abs(recovered.s - s)) <= 1e-9


def test_audit_is_deterministic(vinberg):
    serial = characterization_audit(vinberg, [1.0, 1.0, 2.0], n=3000, seed=9, settings=Settings(chunk_size=500))
    threaded = characterization_audit(vinberg, [1.0, 1.0, 2.0], n=3000, seed=9,
                                      settings=Settings(chunk_size=500, workers=4))
    assert serial.to_json() == threaded.to_json()


@pytest.mark.parametrize("name, reflected", [("sym2", False), ("sym3", False), ("vinberg", False),
                                             ("vinberg", True), ("lorentz3", True)])
def test_orbit_step_accepts_base_point(name, reflected):
    c = cone_zoo.by_name(name)
    report = characterization_audit(c, REGULAR_S[name], reflected=reflected, n=500, seed=3)
    orbit = report["orbit"]
    assert orbit.metrics["outside_accepted"] == 0
    assert orbit.metrics["orbit_mismatches"] == 0
    assert orbit.passed
