# -*- coding: utf-8 -*-
# Copyright © 2024, homocone developers
#
# All rights reserved.
#
# Redistribution and use in source and binary forms, with or without
# modification, are permitted under the terms of the BSD License. See
# LICENSE file in the root of the Project.
"""Wishart laws P(theta, R_s) on a homogeneous cone.

Samples are drawn with a Bartlett-type construction X = rho(T) E_eps, where
t_kk^2 are Gamma distributed and the block coefficients of T are centered
Gaussians with variance 1/2. Random numbers come in chunks of
`Settings.chunk_size` samples, each chunk from its own Philox stream keyed
by (seed, chunk index), so the result does not depend on how many worker
threads produce the chunks.
"""
import logging
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import stats

from .config import DEFAULT
from .cone_model import StructuredMatrix
from .errors import NonRegularStratum, NotInGindikinSet, PreconditionViolation
from .power_riesz import RieszParameter, as_parameter, p_vector, riesz_laplace
from .triangular_group import dual_decompose, embed_lower, inverse

LaplaceEstimate = namedtuple("LaplaceEstimate", ["estimate", "std_error"])
Moments = namedtuple("Moments", ["mean", "covariance"])


class SampleBatch(object):
    """n samples of one Wishart law, stored as an (n, dim) coordinate array.

    Parameters
    ----------
    structure: ConeStructure
    s: RieszParameter
    theta: StructuredMatrix
        The canonical parameter, -theta lies in the dual cone.
    vectors: numpy.ndarray
    seed: int
    eps: tuple of int
        The stratum the samples were drawn from, all ones for regular s.
    """

    def __init__(self, structure, s, theta, vectors, seed, eps=None):
        v = np.array(vectors, dtype=float)
        if v.ndim != 2 or v.shape[1] != structure.dim:
            raise ValueError(f"Sample array must be (n, {structure.dim}), got {v.shape}!")
        v.flags.writeable = False
        self._structure = structure
        self._s = s
        self._theta = theta
        self._vectors = v
        self._seed = seed
        self._eps = tuple(eps) if eps is not None else tuple([1] * structure.r)

    @property
    def structure(self):
        return self._structure

    @property
    def s(self):
        return self._s

    @property
    def theta(self):
        return self._theta

    @property
    def seed(self):
        return self._seed

    @property
    def eps(self):
        return self._eps

    @property
    def count(self):
        return self._vectors.shape[0]

    @property
    def vectors(self):
        return self._vectors

    @property
    def samples(self):
        return [StructuredMatrix(self._structure, v) for v in self._vectors]

    def matrices(self):
        """The embedded N x N samples as an (n, N, N) array."""
        return self._structure.embed_vector(self._vectors)

    def min_eigenvalue(self):
        return float(np.min(np.linalg.eigvalsh(self.matrices())))

    def projection(self, u):
        """<u, X_i> for every sample."""
        return self._vectors @ (self._structure.weights * u.vector)

    def metadata(self):
        return {"cone": self._structure.name, "s": [float(v) for v in self._s.s],
                "theta": [float(v) for v in self._theta.vector], "seed": self._seed, "n": self.count}

    def __len__(self):
        return self.count

    def __getitem__(self, index):
        return StructuredMatrix(self._structure, self._vectors[index])

    def __iter__(self):
        for v in self._vectors:
            yield StructuredMatrix(self._structure, v)

    def __repr__(self):
        return f"SampleBatch({self._structure.name!r}, s={self._s.s.tolist()}, n={self.count}, seed={self._seed})"


def chunk_generator(seed, index):
    """The independent generator of chunk `index`."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def bartlett_shapes(structure, s, eps, settings=DEFAULT):
    """Gamma shapes sigma_k of t_kk^2 for the columns k with eps_k = 1.

    `settings.sigma_candidate` selects sigma_k = s_k - p_k(eps)/2 ("p") or
    sigma_k = s_k - q_k(eps)/2 with q_k(eps) = sum_{l>k} eps_l dim V_lk ("q").
    """
    s = np.asarray(getattr(s, "s", s), dtype=float)
    if settings.sigma_candidate == "p":
        offset = p_vector(structure, eps)
    elif settings.sigma_candidate == "q":
        offset = np.array([sum(eps[l - 1] * structure.block_dim(l, k) for l in range(k + 1, structure.r + 1))
                           for k in range(1, structure.r + 1)], dtype=float)
    else:
        raise ValueError(f"Unknown sigma candidate {settings.sigma_candidate!r}, use 'p' or 'q'!")
    shapes = s - offset / 2.0
    active = np.array(eps) == 1
    if np.any(shapes[active] <= 0):
        logging.error(f"Non-positive Gamma shape {shapes} for s={s.tolist()}, eps={tuple(eps)}")
        raise NotInGindikinSet(f"Gamma shapes {shapes[active].tolist()} are not positive!", shapes=shapes.tolist())
    return shapes


def _draw_triangular(structure, shapes, eps, count, rng):
    """(count, dim) coordinates of T; columns with eps_k = 0 are the identity column."""
    r = structure.r
    v = np.zeros((count, structure.dim))
    v[:, :r] = 1.0
    for k in range(1, r + 1):
        if eps[k - 1] == 1:
            v[:, k - 1] = np.sqrt(rng.standard_gamma(shapes[k - 1], size=count))
    for (l, k) in structure.pairs:
        if eps[k - 1] == 1 and structure.block_dim(l, k) > 0:
            v[:, structure.block_range(l, k)] = rng.normal(0.0, np.sqrt(0.5), size=(count, structure.block_dim(l, k)))
    return v


def _generate_chunk(structure, shapes, eps, tilt, count, seed, index):
    rng = chunk_generator(seed, index)
    t = _draw_triangular(structure, shapes, eps, count, rng)
    L = structure.embed_lower_vector(t)
    if tilt is not None:
        # the product stays in H_V; re-reading its coordinates keeps empty blocks exactly zero
        L = structure.embed_lower_vector(structure.coordinates(tilt @ L))
    e = np.concatenate([np.full(n_k, float(e_k)) for n_k, e_k in zip(structure.n, eps)])
    M = (L * e) @ np.transpose(L, (0, 2, 1))
    logging.debug(f"chunk {index}: {count} samples")
    return structure.coordinates(M)


def _generate(structure, shapes, eps, tilt, n, seed, settings):
    n = int(n)
    if n < 0:
        raise ValueError(f"Sample count must be non-negative, got {n}!")
    size = max(int(settings.chunk_size), 1)
    counts = [min(size, n - start) for start in range(0, n, size)]
    jobs = [(structure, shapes, eps, tilt, c, seed, i) for i, c in enumerate(counts)]
    if len(jobs) == 0:
        return np.zeros((0, structure.dim))
    if settings.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=int(settings.workers)) as pool:
            chunks = list(pool.map(lambda job: _generate_chunk(*job), jobs))
    else:
        chunks = [_generate_chunk(*job) for job in jobs]
    return np.concatenate(chunks, axis=0)


def _tilt(theta, settings):
    """The lower triangular matrix of S^-1 with rho*(S) I_N = -theta, None for theta = -I_N."""
    c = theta.structure
    if np.array_equal(theta.vector, -c.identity().vector):
        return None
    S = dual_decompose(-theta, settings)
    return embed_lower(inverse(S, settings))


def _default_theta(structure, theta):
    return -structure.identity() if theta is None else theta


def sample_wishart(structure, s, theta=None, n=100000, seed=42, settings=DEFAULT):
    """Draws n samples of e^<theta, x> R_s(dx) / L_{R_s}(theta) for regular s.

    theta defaults to -I_N; -theta must lie in the dual cone.
    """
    s = as_parameter(s, structure, settings)
    if not s.in_gindikin_set():
        logging.error(f"{s.s.tolist()} is not in the Gindikin-Wallach set of {structure.name}")
        raise NotInGindikinSet(f"s = {s.s.tolist()} is not in the Gindikin-Wallach set!", s=s.s.tolist())
    if not s.is_regular():
        logging.error(f"{s.s.tolist()} lies in the singular stratum {s.classification}")
        raise NonRegularStratum(f"s = {s.s.tolist()} lies in the stratum {s.classification}, use sample_singular!",
                                eps=s.classification)
    theta = _default_theta(structure, theta)
    eps = tuple([1] * structure.r)
    shapes = bartlett_shapes(structure, s, eps, settings)
    tilt = _tilt(theta, settings)
    logging.info(f"Sampling {n} Wishart variates on {structure.name} with s={s.s.tolist()}, seed {seed}")
    vectors = _generate(structure, shapes, eps, tilt, n, seed, settings)
    return SampleBatch(structure, s, theta, vectors, seed, eps)


def sample_singular(structure, s, eps, n=100000, seed=42, theta=None, settings=DEFAULT):
    """Draws n samples of R_s for s in a singular stratum Xi(eps).

    Only the columns k with eps_k = 1 of the triangular factor enter
    X = rho(T) E_eps, so the samples lie in the closure of O_eps.
    """
    s = as_parameter(s, structure, settings)
    eps = tuple(int(e) for e in eps)
    if len(eps) != structure.r or any(e not in (0, 1) for e in eps):
        raise PreconditionViolation(f"eps must be a 0/1 vector of length {structure.r}, got {eps}!")
    if all(e == 1 for e in eps):
        raise PreconditionViolation("eps = (1, ..., 1) is the regular stratum, use sample_wishart!")
    if s.classification != eps:
        logging.error(f"{s.s.tolist()} is not in Xi{eps} (stratum {s.classification})")
        raise NotInGindikinSet(f"s = {s.s.tolist()} is not in Xi{eps}!", s=s.s.tolist(), eps=eps)
    theta = _default_theta(structure, theta)
    shapes = bartlett_shapes(structure, s, eps, settings)
    tilt = _tilt(theta, settings)
    logging.info(f"Sampling {n} singular variates on {structure.name} with s={s.s.tolist()}, eps={eps}")
    vectors = _generate(structure, shapes, eps, tilt, n, seed, settings)
    return SampleBatch(structure, s, theta, vectors, seed, eps)


def empirical_laplace(batch, eta):
    """Mean and standard error of exp(<eta, X_i>) over the batch."""
    values = batch.projection(eta)
    terms = np.exp(values)
    n = terms.size
    estimate = float(np.mean(terms))
    std_error = float(np.std(terms, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    if n > 0 and np.max(values) > 0 and np.max(terms) > 0.1 * np.sum(terms):
        logging.warning(f"Laplace estimate at eta dominated by a single sample "
                        f"(max <eta, X> = {np.max(values):.3g}), the estimator may have infinite variance")
    return LaplaceEstimate(estimate, std_error)


LAPLACE_GRID = (0.5, 1.0, 2.0, 3.0, 4.0)


def laplace_points(structure):
    """Labelled eta: -t I_N for t in LAPLACE_GRID and -3 on the first diagonal block only.

    The scalar points cannot tell the Bartlett shape candidates apart, the
    last one does.
    """
    identity = structure.identity()
    points = [(f"-{t}I", -t * identity) for t in LAPLACE_GRID]
    first = structure.from_blocks([-3.0] + [0.0] * (structure.r - 1))
    points.append(("-3E_11", first))
    return points


def closed_form_laplace(batch, eta, settings=DEFAULT):
    """E exp(<eta, X>) for X ~ R_s tilted by the batch theta, from Delta* alone."""
    theta = batch.theta
    return riesz_laplace(batch.s, -(theta + eta), settings) / riesz_laplace(batch.s, -theta, settings)


def empirical_moments(batch):
    """Coordinatewise sample mean and the covariance over the Z_V coordinates."""
    if batch.count < 2:
        raise ValueError(f"Need at least two samples for moments, got {batch.count}!")
    mean = StructuredMatrix(batch.structure, np.mean(batch.vectors, axis=0))
    covariance = np.atleast_2d(np.cov(batch.vectors, rowvar=False))
    return Moments(mean, covariance)


def convolve(first, second):
    """The batch of sums X_i + X'_i; a sample of R_{s+s'} tilted by theta if both share theta."""
    if first.structure != second.structure or first.count != second.count:
        raise ValueError("Batches must share cone structure and sample count!")
    if not np.array_equal(first.theta.vector, second.theta.vector):
        raise ValueError("Batches must share the canonical parameter theta!")
    s = RieszParameter(first.s.s + second.s.s, first.structure)
    return SampleBatch(first.structure, s, first.theta, first.vectors + second.vectors,
                       first.seed, first.eps)


def convolution_check(structure, s, n=10000, seed=42, theta=None, settings=DEFAULT):
    """Two-sample KS test of <I, X + X'> against <I, Y>, X, X' ~ R_s and Y ~ R_2s.

    Returns the scipy KstestResult (statistic, pvalue).
    """
    s = as_parameter(s, structure, settings)
    first = sample_wishart(structure, s, theta, n, seed, settings)
    second = sample_wishart(structure, s, theta, n, seed + 1, settings)
    doubled = sample_wishart(structure, 2.0 * s.s, theta, n, seed + 2, settings)
    total = convolve(first, second)
    identity = structure.identity()
    return stats.ks_2samp(total.projection(identity), doubled.projection(identity))
