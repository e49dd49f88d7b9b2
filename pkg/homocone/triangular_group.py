# -*- coding: utf-8 -*-
# Copyright © 2024, homocone developers
#
# All rights reserved.
#
# Redistribution and use in source and binary forms, with or without
# modification, are permitted under the terms of the BSD License. See
# LICENSE file in the root of the Project.
"""The triangular group H_V, its actions rho and rho*, and the two
Cholesky-type decompositions x = rho(T) I_N and xi = rho*(T) I_N.
"""
import logging

import numpy as np
from scipy import linalg

from .config import DEFAULT
from .cone_model import StructuredMatrix, check_closure
from .errors import NotInCone, NotInDualCone, PreconditionViolation, StructureLeak


class TriangularElement(object):
    """T in H_V: positive scalars t_kk on the diagonal blocks and T_lk in V_lk.

    The coordinate vector has the layout of Z_V: t_11..t_rr first, then the
    block coefficients.
    """

    def __init__(self, structure, vector):
        v = np.array(vector, dtype=float).reshape(-1)
        if v.size != structure.dim:
            raise ValueError(f"Expected {structure.dim} coordinates, got {v.size}!")
        if np.any(v[:structure.r] <= 0):
            raise PreconditionViolation(f"Diagonal entries of T must be positive, got {v[:structure.r]}!")
        v.flags.writeable = False
        self._structure = structure
        self._vector = v

    @property
    def structure(self):
        return self._structure

    @property
    def vector(self):
        return self._vector

    @property
    def tdiag(self):
        return self._vector[:self._structure.r]

    @property
    def tblocks(self):
        return {p: self._vector[self._structure.block_range(*p)] for p in self._structure.pairs}

    @property
    def matrix(self):
        return embed_lower(self)

    def is_diagonal(self):
        return not np.any(self._vector[self._structure.r:])

    def __repr__(self):
        return f"TriangularElement({np.array2string(self._vector, precision=6)})"


def identity_element(structure):
    return TriangularElement(structure, structure.identity().vector)


def triangular_element(structure, tdiag, tblocks=None):
    return TriangularElement(structure, structure.from_blocks(tdiag, tblocks).vector)


def diagonal_element(structure, tdiag):
    return triangular_element(structure, tdiag)


def random_element(structure, rng, spread=0.3):
    """T with log t_kk and block coefficients drawn from N(0, spread^2)."""
    v = rng.normal(0.0, spread, size=structure.dim)
    v[:structure.r] = np.exp(v[:structure.r])
    return TriangularElement(structure, v)


def embed_lower(T):
    return T.structure.embed_lower_vector(T.vector)


def project_lower(structure, M, settings=DEFAULT, what="product"):
    """Reads a lower triangular N x N matrix back into H_V coordinates."""
    M = np.asarray(M, dtype=float)
    v = structure.coordinates(M)
    residual = float(np.linalg.norm(M - structure.embed_lower_vector(v)))
    if residual > settings.closure_tol * max(np.linalg.norm(M), 1.0):
        logging.error(f"{what} left H_V, residual {residual:.3e}")
        raise StructureLeak(f"{what} is not an element of H_V (residual {residual:.3e})!", residual=residual)
    return TriangularElement(structure, v)


def compose(S, T, settings=DEFAULT):
    """The group product S T."""
    return project_lower(S.structure, embed_lower(S) @ embed_lower(T), settings, "composition")


def inverse(T, settings=DEFAULT):
    L = embed_lower(T)
    Linv = linalg.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    return project_lower(T.structure, Linv, settings, "inverse")


def rho_apply(T, x, settings=DEFAULT):
    """rho(T) x = T x T^T."""
    L = embed_lower(T)
    M = L @ x.matrix @ L.T
    y, residual = x.structure.project(M)
    check_closure(residual, np.linalg.norm(M), "rho(T) x", settings)
    return y


def rho_star_apply(T, xi, settings=DEFAULT):
    """The adjoint of rho(T) with respect to the standard inner product."""
    return rho_star_map(T, settings).apply(xi)


class LinearMap(object):
    """A linear map of Z_V, stored in an orthonormal basis of (Z_V, <.,.>).

    kind is one of "rho", "rho_star", "scalar", "identity" or "generic";
    `element` keeps T for rho/rho_star maps and the factor for scalar maps.
    """

    def __init__(self, structure, matrix, kind="generic", element=None):
        m = np.array(matrix, dtype=float)
        if m.shape != (structure.dim, structure.dim):
            raise ValueError(f"Linear map must be {structure.dim}x{structure.dim}, got {m.shape}!")
        m.flags.writeable = False
        self._structure = structure
        self._matrix = m
        self._kind = kind
        self._element = element

    @property
    def structure(self):
        return self._structure

    @property
    def matrix(self):
        return self._matrix

    @property
    def kind(self):
        return self._kind

    @property
    def element(self):
        return self._element

    def apply(self, x):
        c = self._structure
        return StructuredMatrix(c, c.from_orthonormal(self._matrix @ c.to_orthonormal(x.vector)))

    __call__ = apply

    def adjoint(self):
        kind = {"rho": "rho_star", "rho_star": "rho"}.get(self._kind, self._kind)
        return LinearMap(self._structure, self._matrix.T, kind, self._element)

    def apply_vectors(self, vectors):
        """Applies the map to an (n, dim) stack of Z_V coordinates."""
        c = self._structure
        return c.from_orthonormal(c.to_orthonormal(vectors) @ self._matrix.T)

    def inverse(self):
        if self._kind == "scalar":
            return scalar_map(self._structure, 1.0 / self._element)
        if self._kind == "identity":
            return self
        if self._kind == "rho":
            return rho_map(inverse(self._element))
        if self._kind == "rho_star":
            return rho_star_map(inverse(self._element))
        return LinearMap(self._structure, np.linalg.inv(self._matrix), "generic")

    def __matmul__(self, other):
        if not isinstance(other, LinearMap):
            return NotImplemented
        if self._kind == "identity":
            return other
        if other.kind == "identity":
            return self
        if self._kind == "scalar" and other.kind == "scalar":
            return scalar_map(self._structure, self._element * other.element)
        if self._kind == "rho" and other.kind == "rho":
            return rho_map(compose(self._element, other.element))
        return LinearMap(self._structure, self._matrix @ other.matrix, "generic")

    def __repr__(self):
        return f"LinearMap(kind={self._kind}, dim={self._structure.dim})"


def _orthonormal_basis_matrices(structure):
    w = np.sqrt(structure.weights)
    return structure.embed_vector(np.diag(1.0 / w))


def rho_map(T, settings=DEFAULT):
    c = T.structure
    L = embed_lower(T)
    images = np.einsum("ij,pjk,lk->pil", L, _orthonormal_basis_matrices(c), L)
    coords = c.coordinates(images)
    residual = float(np.max(np.linalg.norm(images - c.embed_vector(coords), axis=(1, 2))))
    check_closure(residual, float(np.max(np.linalg.norm(images, axis=(1, 2)))), "rho(T)", settings)
    return LinearMap(c, c.to_orthonormal(coords).T, "rho", T)


def rho_star_map(T, settings=DEFAULT):
    return rho_map(T, settings).adjoint()


def scalar_map(structure, factor):
    return LinearMap(structure, float(factor) * np.eye(structure.dim), "scalar", float(factor))


def identity_map(structure):
    return LinearMap(structure, np.eye(structure.dim), "identity", 1.0)


def cholesky_structured(x, settings=DEFAULT):
    """T in H_V with rho(T) I_N = x."""
    M = x.matrix
    try:
        L = linalg.cholesky(M, lower=True)
    except linalg.LinAlgError:
        logging.error("Cholesky factorization failed, point is not in the cone.")
        raise NotInCone("Point is not positive definite, it does not lie in Omega_V!")
    return project_lower(x.structure, L, settings, "Cholesky factor")


def _dual_weight_matrix(structure, eta):
    """H with <y, eta> = trace(H^T y) for all y in Z_V."""
    return np.tensordot(structure.weights * eta.vector, structure.functionals, axes=(0, 0))


def _functional_element(structure, M):
    """Coordinates of the element representing y -> trace(M y) on Z_V."""
    return np.tensordot(M, structure.symmetric_basis, axes=([-2, -1], [1, 2])) / structure.weights


def _dual_image(structure, L, D):
    return _functional_element(structure, L.T @ D @ L)


def _dual_jacobian(structure, L, D):
    A = L.T @ D
    P = np.einsum("ij,pjk->pik", A, structure.lower_basis)
    return _functional_element(structure, P + np.transpose(P, (0, 2, 1))).T


def dual_decompose(xi, settings=DEFAULT, return_info=False):
    """The unique T in H_V with rho*(T) I_N = xi.

    Damped Newton on the coordinates of T started at T = I; steps are halved
    until the diagonal stays positive and the residual decreases. Failure to
    converge within `settings.newton_max_iter` iterations raises NotInDualCone,
    which doubles as the membership test for the dual cone.
    """
    c = xi.structure
    r = c.r
    target = xi.vector
    scale = float(np.sqrt(np.dot(c.weights * target, target)))
    if np.any(target[:r] <= 0):
        logging.error(f"Dual point has non-positive diagonal {target[:r]}")
        raise NotInDualCone("Point is not in the dual cone (non-positive diagonal)!", iterations=0)

    def residual_norm(v):
        return float(np.sqrt(np.dot(c.weights * v, v)))

    D = _dual_weight_matrix(c, c.identity())
    phi = c.identity().vector.copy()
    L = c.embed_lower_vector(phi)
    res = target - _dual_image(c, L, D)
    norm = residual_norm(res)
    iterations = 0
    while iterations < settings.newton_max_iter and norm > settings.newton_tol * scale:
        iterations += 1
        J = _dual_jacobian(c, L, D)
        try:
            step = np.linalg.solve(J, res)
        except np.linalg.LinAlgError:
            logging.debug("Singular Jacobian in dual decomposition.")
            break
        alpha = 1.0
        accepted = False
        for _ in range(settings.newton_max_halvings):
            trial = phi + alpha * step
            if np.all(trial[:r] > 0):
                L_trial = c.embed_lower_vector(trial)
                res_trial = target - _dual_image(c, L_trial, D)
                norm_trial = residual_norm(res_trial)
                if norm_trial < (1.0 - 1e-4 * alpha) * norm:
                    accepted = True
                    break
            alpha /= 2.0
        logging.debug(f"dual_decompose iteration {iterations}: residual {norm:.3e}, step {alpha:.3e}")
        if not accepted:
            break
        phi, L, res, norm = trial, L_trial, res_trial, norm_trial

    info = {"iterations": iterations, "residual": norm / max(scale, 1e-300)}
    if norm > settings.newton_accept * scale:
        logging.error(f"Dual decomposition did not converge after {iterations} iterations, residual {norm:.3e}")
        raise NotInDualCone(f"Point is not in the dual cone (no convergence after {iterations} iterations)!",
                            iterations=iterations, residual=norm)
    T = TriangularElement(c, phi)
    if return_info:
        return T, info
    return T


def _pivot(value, scale, settings):
    if abs(value) <= settings.membership_tol * max(scale, 1.0):
        return 0, 0.0
    return (1 if value > 0 else -1), float(np.sqrt(abs(value)))


def signed_cholesky(x, settings=DEFAULT):
    """T in H_V and eps in {-1, 1}^r with rho(T) E_eps = x.

    Column-by-column recursion on the block coordinates. Raises
    PreconditionViolation when a pivot vanishes, i.e. x is in no open orbit.
    """
    c = x.structure
    r = c.r
    v = np.zeros(c.dim)
    eps = np.zeros(r, dtype=int)
    scale = float(np.linalg.norm(x.vector))
    blocks = {}

    def block(l, k):
        return blocks.get((l, k), np.zeros((c.n[l - 1], c.n[k - 1])))

    for k in range(1, r + 1):
        d = x.diag[k - 1] - sum(eps[m - 1] * np.sum(block(k, m) ** 2) / c.n[k - 1] for m in range(1, k))
        eps[k - 1], t = _pivot(d, scale, settings)
        if eps[k - 1] == 0:
            raise PreconditionViolation(f"Vanishing pivot at block {k}, point lies in no open orbit!")
        v[k - 1] = t
        for l in range(k + 1, r + 1):
            rhs = x.block(l, k) - sum((eps[m - 1] * block(l, m) @ block(k, m).T for m in range(1, k)),
                                      np.zeros((c.n[l - 1], c.n[k - 1])))
            coefs = np.array([np.sum(rhs * b) / c.n[l - 1] for b in c.basis(l, k)]) / (eps[k - 1] * t)
            v[c.block_range(l, k)] = coefs
            blocks[(l, k)] = sum((a * b for a, b in zip(coefs, c.basis(l, k))), np.zeros((c.n[l - 1], c.n[k - 1])))
    return TriangularElement(c, v), tuple(int(e) for e in eps)


def signed_dual_decompose(xi, settings=DEFAULT):
    """T in H_V and eps in {-1, 1}^r with rho*(T) E_eps = xi.

    Backward recursion from the last block; exact counterpart of
    signed_cholesky for the adjoint action.
    """
    c = xi.structure
    r = c.r
    v = np.zeros(c.dim)
    eps = np.zeros(r, dtype=int)
    scale = float(np.linalg.norm(xi.vector))
    blocks = {}
    t = np.zeros(r)

    def block(l, k):
        return blocks.get((l, k), np.zeros((c.n[l - 1], c.n[k - 1])))

    for k in range(r, 0, -1):
        for l in range(r, k, -1):
            coefs = xi.vector[c.block_range(l, k)].copy()
            for m in range(l + 1, r + 1):
                cross = block(m, l).T @ block(m, k)
                coefs -= np.array([eps[m - 1] * np.sum(cross * b) / c.n[m - 1] for b in c.basis(l, k)])
            coefs = coefs / (eps[l - 1] * t[l - 1]) if len(coefs) > 0 else coefs
            v[c.block_range(l, k)] = coefs
            blocks[(l, k)] = sum((a * b for a, b in zip(coefs, c.basis(l, k))), np.zeros((c.n[l - 1], c.n[k - 1])))
        d = xi.diag[k - 1] - sum(eps[m - 1] * np.sum(block(m, k) ** 2) / c.n[m - 1] for m in range(k + 1, r + 1))
        eps[k - 1], t[k - 1] = _pivot(d, scale, settings)
        if eps[k - 1] == 0:
            raise PreconditionViolation(f"Vanishing pivot at block {k}, point lies in no open dual orbit!")
        v[k - 1] = t[k - 1]
    return TriangularElement(c, v), tuple(int(e) for e in eps)


def character(s, T):
    """chi_s(T) = prod_k t_kk^(2 s_k)."""
    return float(np.exp(log_character(s, T)))


def log_character(s, T):
    s = np.asarray(getattr(s, "s", s), dtype=float)
    if s.size != T.structure.r:
        raise ValueError(f"Parameter has {s.size} entries, the cone has rank {T.structure.r}!")
    return float(2.0 * np.dot(s, np.log(T.tdiag)))
