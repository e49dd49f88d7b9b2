# -*- coding: utf-8 -*-
# Copyright © 2024, homocone developers
#
# All rights reserved.
#
# Redistribution and use in source and binary forms, with or without
# modification, are permitted under the terms of the BSD License. See
# LICENSE file in the root of the Project.
"""Generalized power functions, the Gindikin-Wallach set and sign bookkeeping."""
import itertools
import logging
from fractions import Fraction
from numbers import Integral

import numpy as np

from .config import DEFAULT
from .errors import EmptyBlock, NoBridge, NotInGindikinSet, PreconditionViolation
from .triangular_group import (TriangularElement, dual_decompose, log_character, rho_apply,
                               rho_star_map, signed_cholesky, signed_dual_decompose)


class SignVector(object):

    def __init__(self, eps):
        eps = tuple(int(e) for e in eps)
        if any(e not in (-1, 0, 1) for e in eps):
            raise ValueError(f"Sign vector entries must be -1, 0 or 1, got {eps}!")
        self._eps = eps

    @property
    def eps(self):
        return self._eps

    @property
    def r(self):
        return len(self._eps)

    @property
    def plus(self):
        """I+(eps), 1-based."""
        return [i + 1 for i, e in enumerate(self._eps) if e == 1]

    @property
    def minus(self):
        """I-(eps), 1-based."""
        return [i + 1 for i, e in enumerate(self._eps) if e != 1]

    def is_mixed(self):
        return len(self.plus) > 0 and len(self.minus) > 0

    def __getitem__(self, k):
        return self._eps[k - 1]

    def __iter__(self):
        return iter(self._eps)

    def __len__(self):
        return len(self._eps)

    def __eq__(self, other):
        return tuple(self) == tuple(other)

    def __hash__(self):
        return hash(self._eps)

    def __repr__(self):
        return f"SignVector{self._eps}"


def _signs(eps):
    return eps if isinstance(eps, SignVector) else SignVector(eps)


def sign_matrix(structure, eps):
    """E_eps = diag(eps_1 I_n1, ..., eps_r I_nr)."""
    eps = _signs(eps)
    if eps.r != structure.r:
        raise ValueError(f"Sign vector of length {eps.r} for a cone of rank {structure.r}!")
    return structure.from_blocks(list(eps))


def p_vector(structure, eps):
    """p_k(eps) = sum_{i<k} eps_i dim V_ki."""
    eps = tuple(eps)
    return np.array([sum(eps[i - 1] * structure.block_dim(k, i) for i in range(1, k))
                     for k in range(1, structure.r + 1)], dtype=float)


def q_vector(structure):
    """q_k = sum_{l>k} dim V_lk."""
    return np.array([sum(structure.block_dim(l, k) for l in range(k + 1, structure.r + 1))
                     for k in range(1, structure.r + 1)], dtype=float)


def _is_exact(value):
    return isinstance(value, (Integral, Fraction))


def _in_stratum(s, p, eps, tol):
    for s_k, p_k, e in zip(s, p, eps):
        half = Fraction(int(p_k), 2)
        if _is_exact(s_k):
            ok = (s_k > half) if e == 1 else (s_k == half)
        else:
            ok = (s_k > float(half) + tol) if e == 1 else (abs(s_k - float(half)) <= tol)
        if not ok:
            return False
    return True


def gindikin_membership(structure, s, settings=DEFAULT):
    """The eps in {0,1}^r with s in Xi(eps), or None if s is not in the Gindikin-Wallach set."""
    s = list(getattr(s, "s", s))
    if len(s) != structure.r:
        raise ValueError(f"Parameter has {len(s)} entries, the cone has rank {structure.r}!")
    matches = [eps for eps in itertools.product((0, 1), repeat=structure.r)
               if _in_stratum(s, p_vector(structure, eps), eps, settings.gindikin_tol)]
    if len(matches) > 1:
        logging.error(f"Strata overlap for s={s}: {matches}")
    return matches[0] if len(matches) > 0 else None


class RieszParameter(object):
    """s in R^r, classified against the Gindikin-Wallach set of a cone.

    Parameters
    ----------
    s: sequence of float
    structure: ConeStructure, optional
        When given, the stratum eps with s in Xi(eps) and the values
        p_k(eps) are computed and cached.
    """

    def __init__(self, s, structure=None, settings=DEFAULT):
        raw = list(s)
        self._s = np.array([float(v) for v in raw], dtype=float)
        self._s.flags.writeable = False
        self._structure = structure
        self._classification = None
        self._p = None
        if structure is not None:
            self._classification = gindikin_membership(structure, raw, settings)
            if self._classification is not None:
                self._p = p_vector(structure, self._classification)

    @property
    def s(self):
        return self._s

    @property
    def r(self):
        return self._s.size

    @property
    def structure(self):
        return self._structure

    @property
    def classification(self):
        return self._classification

    @property
    def p(self):
        return self._p

    def in_gindikin_set(self):
        return self._classification is not None

    def is_regular(self):
        return self._classification is not None and all(e == 1 for e in self._classification)

    def reversed(self):
        """s* = (s_r, ..., s_1)."""
        return RieszParameter(self._s[::-1], self._structure)

    def __neg__(self):
        return RieszParameter(-self._s, self._structure)

    def __mul__(self, factor):
        return RieszParameter(self._s * float(factor), self._structure)

    __rmul__ = __mul__

    def __add__(self, other):
        return RieszParameter(self._s + np.asarray(getattr(other, "s", other), dtype=float), self._structure)

    def __iter__(self):
        return iter(self._s)

    def __len__(self):
        return self._s.size

    def __repr__(self):
        return f"RieszParameter({self._s.tolist()}, stratum={self._classification})"


def as_parameter(s, structure, settings=DEFAULT):
    if isinstance(s, RieszParameter) and s.structure is structure:
        return s
    return RieszParameter(getattr(s, "s", s), structure, settings)


def require_gindikin(s, structure, settings=DEFAULT):
    s = as_parameter(s, structure, settings)
    if not s.in_gindikin_set():
        logging.error(f"{s.s.tolist()} is not in the Gindikin-Wallach set of {structure.name}")
        raise NotInGindikinSet(f"s = {s.s.tolist()} is not in the Gindikin-Wallach set!", s=s.s.tolist())
    return s


def log_dual_power(s, xi, settings=DEFAULT):
    s = np.asarray(getattr(s, "s", s), dtype=float)
    return log_character(s[::-1], dual_decompose(xi, settings))


def dual_power(s, xi, settings=DEFAULT):
    """Delta*_s(xi) = chi_{s*}(T) for xi = rho*(T) I_N."""
    return float(np.exp(log_dual_power(s, xi, settings)))


def log_riesz_laplace(s, theta, settings=DEFAULT):
    s = require_gindikin(s, theta.structure, settings)
    return log_dual_power(-s.s[::-1], theta, settings)


def riesz_laplace(s, theta, settings=DEFAULT):
    """L_{R_s}(-theta) = Delta*_{-s*}(theta) for theta in the dual cone."""
    return float(np.exp(log_riesz_laplace(s, theta, settings)))


class SupportFlags(object):

    def __init__(self, zero_coordinates):
        self._zero = frozenset(zero_coordinates)

    @property
    def hyperplane_concentrated(self):
        return len(self._zero) > 0

    @property
    def zero_coordinates(self):
        return set(self._zero)

    def to_dict(self):
        return {"hyperplane_concentrated": self.hyperplane_concentrated,
                "zero_coordinates": sorted(self._zero)}

    def __repr__(self):
        return f"SupportFlags(hyperplane_concentrated={self.hyperplane_concentrated}, zero={sorted(self._zero)})"


def support_flags(structure, s, settings=DEFAULT):
    """Whether R_s is concentrated on a hyperplane, and the diagonal coordinates that vanish on its support."""
    s = require_gindikin(s, structure, settings)
    zero = [k + 1 for k, v in enumerate(s.s) if abs(v) <= settings.gindikin_tol]
    return SupportFlags(zero)


def _block_coefficients(structure, l, k, v):
    v = np.asarray(v, dtype=float)
    if v.ndim == 2:
        return np.array([np.sum(v * b) / structure.n[l - 1] for b in structure.basis(l, k)])
    return v.reshape(-1)


def flip_element(structure, k, l, v):
    """T(v): unit diagonal, block (l, k) equal to v, zero elsewhere."""
    if not (1 <= k < l <= structure.r):
        raise PreconditionViolation(f"Need 1 <= k < l <= r, got k={k}, l={l}!")
    if structure.block_dim(l, k) == 0:
        raise EmptyBlock(f"V_{l}{k} is the zero space!", l=l, k=k)
    coefs = _block_coefficients(structure, l, k, v)
    if coefs.size != structure.block_dim(l, k):
        raise ValueError(f"Expected {structure.block_dim(l, k)} coefficients for V_{l}{k}, got {coefs.size}!")
    vector = structure.identity().vector.copy()
    vector[structure.block_range(l, k)] = coefs
    return TriangularElement(structure, vector)


def flipped_signs(eps, k, l):
    """eps' with eps'_k = eps_l, all other entries unchanged."""
    eps = list(_signs(eps))
    eps[k - 1] = eps[l - 1]
    return SignVector(eps)


def _check_flip(structure, eps, k, l, v, settings):
    eps = _signs(eps)
    if eps[k] == 0 or eps[k] != -eps[l]:
        raise PreconditionViolation(f"Need eps_k = -eps_l != 0, got eps_{k}={eps[k]}, eps_{l}={eps[l]}!")
    coefs = _block_coefficients(structure, l, k, v)
    norm = float(np.dot(coefs, coefs))
    if abs(norm - 2.0) > settings.membership_tol:
        raise PreconditionViolation(f"Need (v|v) = 2, got {norm}!", norm=norm)
    return eps, coefs


def flip_midpoint(structure, eps, k, l, v, settings=DEFAULT):
    """(rho*(T(v)) E_eps + rho*(T(-v)) E_eps) / 2, which equals E_eps' with eps'_k = -eps_k."""
    eps, coefs = _check_flip(structure, eps, k, l, v, settings)
    E = sign_matrix(structure, eps)
    plus = rho_star_map(flip_element(structure, k, l, coefs), settings).apply(E)
    minus = rho_star_map(flip_element(structure, k, l, -coefs), settings).apply(E)
    return (plus + minus) / 2.0


def primal_midpoint(x, k, l, v, settings=DEFAULT):
    """x_v = (rho(T(v)) x + rho(T(-v)) x) / 2; differs from x only in x_ll."""
    c = x.structure
    coefs = _block_coefficients(c, l, k, v)
    plus = rho_apply(flip_element(c, k, l, coefs), x, settings)
    minus = rho_apply(flip_element(c, k, l, -coefs), x, settings)
    return (plus + minus) / 2.0


def bridge_vector(structure, k, l):
    """An element v of V_lk with (v|v) = 2."""
    if structure.block_dim(l, k) == 0:
        raise EmptyBlock(f"V_{l}{k} is the zero space!", l=l, k=k)
    v = np.zeros(structure.block_dim(l, k))
    v[0] = np.sqrt(2.0)
    return v


def bridges(structure, eps):
    """All (k, l), k < l, with eps_k = -eps_l != 0 and V_lk nonzero."""
    eps = _signs(eps)
    return [(k, l) for (l, k) in structure.pairs
            if eps[k] != 0 and eps[k] == -eps[l] and structure.block_dim(l, k) > 0]


def require_bridge(structure, eps):
    """Like bridges, but raises NoBridge when the list would be empty."""
    found = bridges(structure, eps)
    if len(found) == 0:
        raise NoBridge(f"No nonzero V_lk joins the blocks with sign +1 and -1 in eps = {tuple(eps)}!",
                       eps=tuple(eps))
    return found


def orbit_signature(x, settings=DEFAULT):
    """The eps in {-1, 1}^r of the open rho(H_V)-orbit O_eps containing x."""
    _, eps = signed_cholesky(x, settings)
    return SignVector(eps)


def open_dual_orbit(xi, settings=DEFAULT):
    """The eps in {-1, 1}^r with xi in O*_eps = rho*(H_V) E_eps."""
    _, eps = signed_dual_decompose(xi, settings)
    return SignVector(eps)
