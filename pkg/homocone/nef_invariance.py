# -*- coding: utf-8 -*-
# Copyright © 2024, homocone developers
#
# All rights reserved.
#
# Redistribution and use in source and binary forms, with or without
# modification, are permitted under the terms of the BSD License. See
# LICENSE file in the root of the Project.
"""Natural exponential families generated by tilted Riesz measures.

A NEFDescriptor stands for mu(dx) = exp(a0 - <theta0, x>) R_s(dx), or
R_s(-dx) in place of R_s(dx) when reflected. Laplace transforms and
cumulants are evaluated in closed form through the generalized power
function; the rest of the module checks how rho(H_V) and scalar maps act
on such a family and bundles these checks into an audit report.
"""
import json
import logging
import itertools
from collections import namedtuple

import numpy as np

from .config import DEFAULT
from .cone_model import require_valid
from .errors import (DegenerateScale, HomoconeError, InconsistentCharacter, NoBridge, NotInDualCone,
                     OutOfDomain, PreconditionViolation)
from .power_riesz import (RieszParameter, as_parameter, bridge_vector, flip_midpoint, flipped_signs,
                          log_dual_power, open_dual_orbit, require_bridge, require_gindikin, sign_matrix)
from .triangular_group import (LinearMap, diagonal_element, dual_decompose, log_character, random_element,
                               rho_map, rho_star_map)
from .wishart_sampler import SampleBatch, chunk_generator, empirical_laplace, sample_singular, sample_wishart

InvarianceResult = namedtuple("InvarianceResult", ["lhs", "rhs", "c_g"])


class NEFDescriptor(object):
    """The generating measure of a NEF invariant under rho(H_V).

    Parameters
    ----------
    structure: ConeStructure
    s: RieszParameter or sequence of float
        Must lie in the Gindikin-Wallach set with all s_k > 0.
    theta0: StructuredMatrix, optional
        Tilt, defaults to 0.
    a0: float
        Log base constant.
    reflected: bool
        Use R_s(-dx) instead of R_s(dx).
    """

    def __init__(self, structure, s, theta0=None, a0=0.0, reflected=False, settings=DEFAULT):
        s = require_gindikin(s, structure, settings)
        if np.any(s.s <= 0):
            logging.error(f"NEF generated by R_s needs all s_k > 0, got {s.s.tolist()}")
            raise PreconditionViolation(f"All s_k must be positive, got {s.s.tolist()}!", s=s.s.tolist())
        self._structure = structure
        self._s = s
        self._theta0 = structure.zeros() if theta0 is None else theta0
        self._a0 = float(a0)
        self._reflected = bool(reflected)
        self._settings = settings

    @property
    def structure(self):
        return self._structure

    @property
    def s(self):
        return self._s

    @property
    def theta0(self):
        return self._theta0

    @property
    def a0(self):
        return self._a0

    @property
    def reflected(self):
        return self._reflected

    @property
    def settings(self):
        return self._settings

    @property
    def sign(self):
        """+1 for R_s(dx), -1 for R_s(-dx)."""
        return -1.0 if self._reflected else 1.0

    def detilted(self):
        """mu0 = exp(<theta0, x>) mu, i.e. the same descriptor with theta0 = 0."""
        return NEFDescriptor(self._structure, self._s, None, self._a0, self._reflected, self._settings)

    def reflection(self):
        """The reflected descriptor with theta0 -> -theta0."""
        return NEFDescriptor(self._structure, self._s, -self._theta0, self._a0, not self._reflected, self._settings)

    def to_dict(self):
        return {"cone": self._structure.name, "s": [float(v) for v in self._s.s],
                "theta0": [float(v) for v in self._theta0.vector], "a0": self._a0, "reflected": self._reflected}

    def __repr__(self):
        return (f"NEFDescriptor({self._structure.name!r}, s={self._s.s.tolist()}, "
                f"reflected={self._reflected})")


def _dual_argument(d, theta):
    """The point of the dual cone at which Delta*_{-s*} is evaluated for L_mu(theta)."""
    return (d.theta0 - theta) if not d.reflected else (theta - d.theta0)


def cumulant(d, theta):
    """k_mu(theta) = log L_mu(theta)."""
    try:
        return d.a0 + log_dual_power(-d.s.s[::-1], _dual_argument(d, theta), d.settings)
    except NotInDualCone as e:
        raise OutOfDomain(f"theta is outside the domain of the Laplace transform ({e})!", theta=theta.vector.tolist())


def laplace(d, theta):
    """L_mu(theta) = exp(a0) Delta*_{-s*}(theta0 - theta), with theta - theta0 when reflected."""
    return float(np.exp(cumulant(d, theta)))


def in_domain(d, theta):
    try:
        cumulant(d, theta)
    except OutOfDomain:
        return False
    return True


def _orthonormal_directions(structure):
    return np.diag(1.0 / np.sqrt(structure.weights))


def mean(d, theta, step=None):
    """Gradient of the cumulant at theta by central differences.

    The default step is `fd_rel_step * (1 + |theta|)`.
    """
    c = d.structure
    h = d.settings.fd_rel_step * (1.0 + theta.norm()) if step is None else float(step)
    grad = np.zeros(c.dim)
    for p, e in enumerate(_orthonormal_directions(c)):
        direction = c.element(e)
        grad[p] = (cumulant(d, theta + h * direction) - cumulant(d, theta - h * direction)) / (2.0 * h)
    return c.element(c.from_orthonormal(grad))


def cumulant_hessian(d, theta, step=None):
    """Second differences of the cumulant in an orthonormal basis of Z_V."""
    c = d.structure
    h = np.sqrt(d.settings.fd_rel_step) * (1.0 + theta.norm()) if step is None else float(step)
    directions = [c.element(e) for e in _orthonormal_directions(c)]
    H = np.zeros((c.dim, c.dim))
    for p, q in itertools.combinations_with_replacement(range(c.dim), 2):
        ep, eq = h * directions[p], h * directions[q]
        value = (cumulant(d, theta + ep + eq) - cumulant(d, theta + ep - eq)
                 - cumulant(d, theta - ep + eq) + cumulant(d, theta - ep - eq)) / (4.0 * h * h)
        H[p, q] = H[q, p] = value
    return H


def _detilted_laplace_log(d, theta):
    return cumulant(d.detilted(), theta)


def invariance_check(d, T, theta):
    """Both sides of L_mu0(rho*(T) theta) = chi_{-s}(T) L_mu0(theta) and c_g = chi_s(T)."""
    image = rho_star_map(T, d.settings).apply(theta)
    log_lhs = _detilted_laplace_log(d, image)
    log_rhs = log_character(-d.s.s, T) + _detilted_laplace_log(d, theta)
    return InvarianceResult(float(np.exp(log_lhs)), float(np.exp(log_rhs)), float(np.exp(log_character(d.s, T))))


def measured_constant(d, T, theta=None):
    """c_g = L_mu0(theta) / L_mu0(rho*(T) theta), read off the Laplace transform alone."""
    theta = (d.sign * -1.0) * d.structure.identity() if theta is None else theta
    image = rho_star_map(T, d.settings).apply(theta)
    return float(np.exp(_detilted_laplace_log(d, theta) - _detilted_laplace_log(d, image)))


class CocycleRecord(object):
    """g together with a(g), b(g) and the invariance constant c_g = exp(-b(g))."""

    def __init__(self, g, a, b, c):
        self._g = g
        self._a = a
        self._b = float(b)
        self._c = float(c)

    @property
    def g(self):
        return self._g

    @property
    def a(self):
        return self._a

    @property
    def b(self):
        return self._b

    @property
    def c(self):
        return self._c

    def __repr__(self):
        return f"CocycleRecord(kind={self._g.kind}, b={self._b:.6g}, c={self._c:.6g})"


def _dual_inverse(g):
    """(g*)^-1."""
    return g.adjoint().inverse()


def cocycle_from_descriptor(d, g):
    """a(g) = theta0 - (g*)^-1 theta0 and b(g) with g_* mu(dx) = exp(<a, x> + b) mu(dx)."""
    if not isinstance(g, LinearMap):
        raise TypeError(f"Expected a LinearMap, got {type(g).__name__}!")
    c = d.structure
    dual_inverse = _dual_inverse(g)
    a = d.theta0 - dual_inverse.apply(d.theta0)
    if g.kind == "identity":
        b = 0.0
    elif g.kind == "rho":
        b = -log_character(d.s, g.element)
    elif g.kind == "scalar":
        b = -float(np.sum(d.s.s)) * np.log(g.element)
    else:
        # probe theta = (g*)^-1 (theta0 -+ I) reduces b to -log Delta*_{-s*}((g*)^-1 I)
        probe = dual_inverse.apply(d.theta0 - d.sign * c.identity())
        try:
            b = cumulant(d, g.adjoint().apply(probe)) - cumulant(d, probe + a)
        except OutOfDomain as e:
            logging.error(f"Laplace probe for b(g) failed: {e}")
            raise
    return CocycleRecord(g, a, b, float(np.exp(-b)))


CocycleLawReport = namedtuple("CocycleLawReport", ["passed", "a_residual", "b_residual"])


def cocycle_laws(record_g, record_gp, record_ggp, settings=DEFAULT):
    """a(gg') = (g*)^-1 a(g') + a(g) and b(gg') = b(g) + b(g'); relative residuals."""
    expected_a = _dual_inverse(record_g.g).apply(record_gp.a) + record_g.a
    a_residual = (record_ggp.a - expected_a).norm() / max(1.0, expected_a.norm())
    expected_b = record_g.b + record_gp.b
    b_residual = abs(record_ggp.b - expected_b) / max(1.0, abs(expected_b))
    passed = a_residual <= settings.cocycle_tol and b_residual <= settings.cocycle_tol
    if not passed:
        logging.info(f"Cocycle laws violated: a residual {a_residual:.3e}, b residual {b_residual:.3e}")
    return CocycleLawReport(bool(passed), float(a_residual), float(b_residual))


def extract_theta0(a_of_cid, c, settings=DEFAULT):
    """theta0 = c / (c - 1) a(c Id)."""
    c = float(c)
    if abs(c - 1.0) < 1e-12:
        raise DegenerateScale(f"Scale c = {c} is too close to 1!", c=c)
    if c <= 0:
        raise PreconditionViolation(f"Scale c must be positive, got {c}!")
    return a_of_cid * (c / (c - 1.0))


def recover_parameter(structure, constant_of, scales=(2.0, 3.0), settings=DEFAULT):
    """s from the invariance constants on the diagonal probes e_j(t).

    `constant_of` maps a TriangularElement T to c_g for g = rho(T); each
    s_j = log c / (2 log t) must agree across the probe scales.
    """
    estimates = np.zeros((len(scales), structure.r))
    for i, t in enumerate(scales):
        for j in range(structure.r):
            tdiag = np.ones(structure.r)
            tdiag[j] = t
            value = float(constant_of(diagonal_element(structure, tdiag)))
            if value <= 0:
                raise InconsistentCharacter(f"Invariance constant {value} at probe e_{j + 1}({t}) is not positive!")
            estimates[i, j] = np.log(value) / (2.0 * np.log(t))
    spread = np.max(np.abs(estimates - estimates[0]), axis=0)
    if np.any(spread > settings.character_tol * np.maximum(1.0, np.abs(estimates[0]))):
        logging.error(f"Character probes disagree: {estimates.tolist()}")
        raise InconsistentCharacter(f"Probes at t = {list(scales)} give different s: {estimates.tolist()}!",
                                    estimates=estimates.tolist())
    return RieszParameter(estimates[0], structure, settings)


def pushforward_parameter(d, g, theta):
    """theta' = (g*)^-1 theta + a(g), the canonical parameter of g_* P(theta, mu)."""
    record = cocycle_from_descriptor(d, g)
    return _dual_inverse(g).apply(theta) + record.a


def sample_family(d, theta, n=100000, seed=42):
    """Samples of P(theta, mu) = exp(<theta, x> - k_mu(theta)) mu(dx)."""
    if not in_domain(d, theta):
        raise OutOfDomain("theta is outside the domain of the Laplace transform!", theta=theta.vector.tolist())
    # unreflected: exp(<theta - theta0, x>) R_s(dx); reflected: the negative of exp(<theta0 - theta, y>) R_s(dy)
    tilt = (theta - d.theta0) if not d.reflected else (d.theta0 - theta)
    s = d.s
    if s.is_regular():
        batch = sample_wishart(d.structure, s, tilt, n, seed, d.settings)
    else:
        batch = sample_singular(d.structure, s, s.classification, n, seed, tilt, d.settings)
    return SampleBatch(d.structure, s, theta, d.sign * batch.vectors, seed, batch.eps)


class AuditStep(object):

    def __init__(self, name, passed, metrics=None):
        self.name = name
        self.passed = bool(passed)
        self.metrics = dict(metrics or {})

    def to_dict(self):
        return {"name": self.name, "pass": self.passed, "metrics": self.metrics}


class AuditReport(object):

    def __init__(self, descriptor, seed, steps):
        self._descriptor = descriptor
        self._seed = seed
        self._steps = list(steps)

    @property
    def steps(self):
        return self._steps

    @property
    def passed(self):
        return all(s.passed for s in self._steps)

    def __getitem__(self, name):
        for s in self._steps:
            if s.name == name:
                return s
        raise KeyError(name)

    def failures(self):
        return [s for s in self._steps if not s.passed]

    def to_dict(self):
        d = self._descriptor
        return {"cone": d.structure.name, "s": [float(v) for v in d.s.s],
                "theta0": [float(v) for v in d.theta0.vector], "reflected": d.reflected,
                "seed": self._seed, "pass": self.passed, "steps": [s.to_dict() for s in self._steps]}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _orbit_step(d, rng, probes=5):
    c = d.structure
    settings = d.settings
    metrics = {"probes": probes, "inside_failures": 0, "outside_accepted": 0, "orbit_mismatches": 0}
    for _ in range(probes):
        S = random_element(c, rng)
        xi = rho_star_map(S, settings).apply(c.identity())
        try:
            T = dual_decompose(xi, settings)
            back = rho_star_map(T, settings).apply(c.identity())
            if (back - xi).norm() > settings.newton_accept * max(1.0, xi.norm()):
                metrics["inside_failures"] += 1
        except NotInDualCone:
            metrics["inside_failures"] += 1
        try:
            dual_decompose(-xi, settings)
            metrics["outside_accepted"] += 1
        except NotInDualCone:
            pass
    detilted = d.detilted()
    identity = c.identity()
    inside = [in_domain(detilted, identity), in_domain(detilted, -identity)]
    metrics["identity_in_domain"] = {"+I": inside[0], "-I": inside[1]}
    exactly_one = inside[0] != inside[1] and inside[1 if not d.reflected else 0]
    for eps in itertools.product((1, -1), repeat=c.r):
        if all(e == 1 for e in eps):
            continue
        E = sign_matrix(c, eps)
        # -I (or +I when reflected) is the base point itself
        if len(set(eps)) > 1 and (in_domain(detilted, E) or in_domain(detilted, -E)):
            metrics["outside_accepted"] += 1
        S = random_element(c, rng)
        try:
            found = open_dual_orbit(rho_star_map(S, settings).apply(E), settings)
            if tuple(found) != eps:
                metrics["orbit_mismatches"] += 1
        except PreconditionViolation:
            metrics["orbit_mismatches"] += 1
    passed = (exactly_one and metrics["inside_failures"] == 0 and metrics["outside_accepted"] == 0
              and metrics["orbit_mismatches"] == 0)
    return AuditStep("orbit", passed, metrics)


def _convexity_step(d):
    c = d.structure
    settings = d.settings
    metrics = {"mixed_signs": 0, "bridges_checked": 0, "max_residual": 0.0, "no_bridge": []}
    for eps in itertools.product((1, -1), repeat=c.r):
        if len(set(eps)) < 2:
            continue
        metrics["mixed_signs"] += 1
        try:
            found = require_bridge(c, eps)
        except NoBridge as e:
            logging.info(str(e))
            metrics["no_bridge"].append(list(eps))
            continue
        for (k, l) in found:
            midpoint = flip_midpoint(c, eps, k, l, bridge_vector(c, k, l), settings)
            target = sign_matrix(c, flipped_signs(eps, k, l))
            metrics["bridges_checked"] += 1
            metrics["max_residual"] = max(metrics["max_residual"], float(np.max(np.abs((midpoint - target).vector))))
    if len(metrics["no_bridge"]) > 0:
        metrics["error"] = "NoBridge"
    passed = len(metrics["no_bridge"]) == 0 and metrics["max_residual"] <= settings.flip_tol
    return AuditStep("convexity", passed, metrics)


def _parameter_step(d):
    metrics = {"s": [float(v) for v in d.s.s]}
    try:
        recovered = recover_parameter(d.structure, lambda T: measured_constant(d, T), settings=d.settings)
    except HomoconeError as e:
        metrics["error"] = type(e).__name__
        return AuditStep("parameter", False, metrics)
    error = float(np.max(np.abs(recovered.s - d.s.s)))
    metrics["recovered"] = [float(v) for v in recovered.s]
    metrics["max_error"] = error
    return AuditStep("parameter", error <= d.settings.character_tol * max(1.0, float(np.max(np.abs(d.s.s)))), metrics)


def _monte_carlo_step(d, rng, n, seed, scales=(0.5, 1.0, 2.0)):
    c = d.structure
    settings = d.settings
    g = rho_map(random_element(c, rng), settings)
    theta = d.theta0 - d.sign * c.identity()
    moved = pushforward_parameter(d, g, theta)
    batch = sample_family(d, theta, n, seed)
    pushed = SampleBatch(c, d.s, moved, g.apply_vectors(batch.vectors), seed, batch.eps)
    probes = []
    passed = True
    for t in scales:
        eta = -d.sign * t * c.identity()
        estimate = empirical_laplace(pushed, eta)
        exact = float(np.exp(cumulant(d, moved + eta) - cumulant(d, moved)))
        deviation = abs(estimate.estimate - exact)
        ok = deviation <= settings.mc_sigma * estimate.std_error
        passed = passed and ok
        probes.append({"t": t, "estimate": estimate.estimate, "std_error": estimate.std_error,
                       "exact": exact, "pass": bool(ok)})
    return AuditStep("monte_carlo", passed, {"n": int(n), "probes": probes})


def characterization_audit(structure, s, theta0=None, reflected=False, n=100000, seed=42, settings=DEFAULT):
    """Runs the orbit, convexity, parameter recovery and Monte Carlo checks.

    Failed checks are reported, not raised; invalid input (a structure
    violating the closure axioms, s outside the Gindikin-Wallach set)
    raises as usual.
    """
    require_valid(structure, settings)
    d = NEFDescriptor(structure, as_parameter(s, structure, settings), theta0, 0.0, reflected, settings)
    rng = chunk_generator(seed, 2 ** 32)
    logging.info(f"Auditing {d}")
    steps = [_orbit_step(d, rng), _convexity_step(d), _parameter_step(d),
             _monte_carlo_step(d, rng, n, seed)]
    for step in steps:
        logging.info(f"audit step {step.name}: {'pass' if step.passed else 'FAIL'}")
    return AuditReport(d, seed, steps)
