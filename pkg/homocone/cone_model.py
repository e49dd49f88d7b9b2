# -*- coding: utf-8 -*-
# Copyright © 2024, homocone developers
#
# All rights reserved.
#
# Redistribution and use in source and binary forms, with or without
# modification, are permitted under the terms of the BSD License. See
# LICENSE file in the root of the Project.
"""Structured symmetric matrix spaces Z_V of a normal block decomposition.

A ConeStructure holds a block partition N = n_1 + ... + n_r and, for every
pair k < l, an orthonormal basis of a subspace V_lk of n_l x n_k matrices.
Elements of Z_V are StructuredMatrix objects; their coordinates are the r
diagonal scalars followed by the block coefficients, blocks sorted by (l, k).
"""
import json
import logging

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .config import DEFAULT
from .errors import ClosureViolation, ConeSpecError


def _readonly(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def block_inner(A, B):
    """(A|B) = trace(A B^T) / n_l for n_l x n_k matrices A and B."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape != B.shape:
        raise ValueError(f"Block shapes differ: {A.shape} vs {B.shape}!")
    return float(np.sum(A * B) / A.shape[0])


class BlockPartition(object):

    def __init__(self, sizes):
        sizes = tuple(int(n) for n in sizes)
        if len(sizes) < 1:
            raise ConeSpecError("A partition needs at least one block!")
        if any(n < 1 for n in sizes):
            raise ConeSpecError(f"Block sizes must be positive, got {sizes}!")
        self._n = sizes
        self._offsets = tuple(int(o) for o in np.concatenate([[0], np.cumsum(sizes)]))

    @property
    def r(self):
        return len(self._n)

    @property
    def n(self):
        return self._n

    @property
    def N(self):
        return self._offsets[-1]

    def block_slice(self, k):
        """Index range of block k (1-based) in the N x N matrix."""
        return slice(self._offsets[k - 1], self._offsets[k])

    def __eq__(self, other):
        return isinstance(other, BlockPartition) and self._n == other._n

    def __hash__(self):
        return hash(self._n)

    def __repr__(self):
        return f"BlockPartition{self._n}"


class ConeStructure(object):
    """Block partition plus orthonormal bases of the subspaces V_lk.

    Parameters
    ----------
    partition: BlockPartition or sequence of int
    blocks: dict
        Maps (l, k), 1-based with l > k, to a list of n_l x n_k matrices
        spanning V_lk. Missing pairs mean V_lk = {0}. The bases are
        orthonormalized (Gram-Schmidt in the block inner product) on load.
    name: str
    """

    def __init__(self, partition, blocks=None, name=""):
        if not isinstance(partition, BlockPartition):
            partition = BlockPartition(partition)
        self._partition = partition
        self._name = str(name)
        blocks = {} if blocks is None else dict(blocks)
        r = partition.r
        self._pairs = [(l, k) for l in range(2, r + 1) for k in range(1, l)]
        self._bases = {}
        for (l, k) in blocks:
            if not (1 <= k < l <= r):
                raise ConeSpecError(f"Block index ({l}, {k}) invalid for rank {r}, need 1 <= k < l <= r!")
        for (l, k) in self._pairs:
            basis = [np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks.get((l, k), [])]
            shape = (partition.n[l - 1], partition.n[k - 1])
            for b in basis:
                if b.shape != shape:
                    raise ConeSpecError(f"Basis matrix of V_{l}{k} has shape {b.shape}, expected {shape}!")
            self._bases[(l, k)] = tuple(_readonly(b) for b in self._orthonormalize(basis, l, k))
        self._offsets = {}
        offset = r
        for pair in self._pairs:
            self._offsets[pair] = offset
            offset += len(self._bases[pair])
        self._dim = offset
        self._weights = _readonly(np.concatenate([np.ones(r), 2.0 * np.ones(self._dim - r)]))
        self._build_coordinate_matrices()

    @staticmethod
    def _orthonormalize(basis, l, k):
        ortho = []
        for b in basis:
            w = b.copy()
            for q in ortho:
                w = w - block_inner(w, q) * q
            norm = np.sqrt(max(block_inner(w, w), 0.0))
            if norm <= 1e-12 * max(1.0, np.sqrt(max(block_inner(b, b), 0.0))):
                logging.warning(f"Dropping linearly dependent basis matrix of V_{l}{k}.")
                continue
            ortho.append(w if norm == 1.0 else w / norm)
        return ortho

    def _build_coordinate_matrices(self):
        N = self.N
        sym = np.zeros((self._dim, N, N))
        low = np.zeros((self._dim, N, N))
        functionals = np.zeros((self._dim, N, N))
        part = self._partition
        for k in range(1, self.r + 1):
            sk = part.block_slice(k)
            eye = np.eye(part.n[k - 1])
            sym[k - 1, sk, sk] = eye
            low[k - 1, sk, sk] = eye
            functionals[k - 1, sk, sk] = eye / part.n[k - 1]
        for (l, k) in self._pairs:
            sl, sk = part.block_slice(l), part.block_slice(k)
            for j, b in enumerate(self._bases[(l, k)]):
                p = self._offsets[(l, k)] + j
                sym[p, sl, sk] = b
                sym[p, sk, sl] = b.T
                low[p, sl, sk] = b
                functionals[p, sl, sk] = b / part.n[l - 1]
        self._sym = _readonly(sym)
        self._low = _readonly(low)
        self._functionals = _readonly(functionals)

    @property
    def name(self):
        return self._name

    @property
    def partition(self):
        return self._partition

    @property
    def r(self):
        return self._partition.r

    @property
    def n(self):
        return self._partition.n

    @property
    def N(self):
        return self._partition.N

    @property
    def dim(self):
        """Dimension of Z_V."""
        return self._dim

    @property
    def pairs(self):
        return list(self._pairs)

    @property
    def weights(self):
        """Diagonal of the standard inner product in coordinates (1 for x_kk, 2 for blocks)."""
        return self._weights

    @property
    def symmetric_basis(self):
        """(dim, N, N) stack: the symmetric matrix of every coordinate."""
        return self._sym

    @property
    def lower_basis(self):
        """(dim, N, N) stack: the lower triangular matrix of every H_V coordinate."""
        return self._low

    @property
    def functionals(self):
        """(dim, N, N) stack F with coordinate p of x equal to sum(F[p] * embed(x))."""
        return self._functionals

    def basis(self, l, k):
        return self._bases[(l, k)]

    def block_dim(self, l, k):
        return len(self._bases[(l, k)])

    def block_range(self, l, k):
        start = self._offsets[(l, k)]
        return slice(start, start + len(self._bases[(l, k)]))

    def coordinate_labels(self):
        labels = [f"d{k}" for k in range(1, self.r + 1)]
        for (l, k) in self._pairs:
            labels += [f"b_{l}_{k}_{j}" for j in range(1, self.block_dim(l, k) + 1)]
        return labels

    # --- elements ---------------------------------------------------------
    def element(self, vector):
        return StructuredMatrix(self, vector)

    def zeros(self):
        return StructuredMatrix(self, np.zeros(self._dim))

    def identity(self):
        v = np.zeros(self._dim)
        v[:self.r] = 1.0
        return StructuredMatrix(self, v)

    def from_blocks(self, diag, offdiag=None):
        """Builds an element from r diagonal scalars and a dict (l, k) -> coefficients."""
        v = np.zeros(self._dim)
        v[:self.r] = np.asarray(diag, dtype=float)
        for pair, coefs in (offdiag or {}).items():
            v[self.block_range(*pair)] = np.asarray(coefs, dtype=float)
        return StructuredMatrix(self, v)

    def to_orthonormal(self, vector):
        """Coordinates in an orthonormal basis of (Z_V, <.,.>)."""
        return np.asarray(vector, dtype=float) * np.sqrt(self._weights)

    def from_orthonormal(self, u):
        return np.asarray(u, dtype=float) / np.sqrt(self._weights)

    # --- embedding --------------------------------------------------------
    def embed_vector(self, vector):
        return np.tensordot(np.asarray(vector, dtype=float), self._sym, axes=(-1, 0))

    def embed_lower_vector(self, vector):
        return np.tensordot(np.asarray(vector, dtype=float), self._low, axes=(-1, 0))

    def coordinates(self, M):
        """Coordinates of the orthogonal projection of (a stack of) N x N matrices."""
        return np.tensordot(np.asarray(M, dtype=float), self._functionals, axes=([-2, -1], [1, 2]))

    def embed(self, x):
        return self.embed_vector(x.vector)

    def project(self, M):
        """Projection onto Z_V and the Frobenius norm of what is left over."""
        M = np.asarray(M, dtype=float)
        v = self.coordinates(M)
        residual = float(np.linalg.norm(M - self.embed_vector(v)))
        return StructuredMatrix(self, v), residual

    # --- comparison and export -------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, ConeStructure) or other.partition != self.partition:
            return False
        return all(len(self._bases[p]) == len(other._bases[p]) and
                   all(np.array_equal(a, b) for a, b in zip(self._bases[p], other._bases[p]))
                   for p in self._pairs)

    def __hash__(self):
        return hash((self._partition, self._dim))

    def __repr__(self):
        dims = {p: self.block_dim(*p) for p in self._pairs if self.block_dim(*p) > 0}
        return f"ConeStructure({self._name!r}, n={self.n}, dims={dims})"

    def to_spec(self):
        blocks = []
        for (l, k) in self._pairs:
            if self.block_dim(l, k) == 0:
                continue
            blocks.append({"l": l, "k": k,
                           "basis": [[float(a) for a in b.ravel()] for b in self._bases[(l, k)]]})
        return {"name": self._name, "partition": list(self.n), "blocks": blocks}

    @classmethod
    def from_spec(cls, spec):
        try:
            partition = BlockPartition(spec["partition"])
            blocks = {}
            for entry in spec.get("blocks", []):
                l, k = int(entry["l"]), int(entry["k"])
                if not (1 <= k < l <= partition.r):
                    raise ConeSpecError(f"Block index ({l}, {k}) invalid, need 1 <= k < l <= {partition.r}!")
                shape = (partition.n[l - 1], partition.n[k - 1])
                basis = []
                for flat in entry.get("basis", []):
                    flat = np.asarray(flat, dtype=float)
                    if flat.size != shape[0] * shape[1]:
                        raise ConeSpecError(f"Basis entry of V_{l}{k} has {flat.size} values, expected {shape[0] * shape[1]}!")
                    basis.append(flat.reshape(shape))
                blocks[(l, k)] = blocks.get((l, k), []) + basis
        except (KeyError, TypeError) as e:
            raise ConeSpecError(f"Malformed cone spec: {e}")
        return cls(partition, blocks, spec.get("name", ""))


def load_spec(filename):
    logging.debug(f"Loading cone spec {filename}")
    with open(filename, "r") as f:
        try:
            spec = json.load(f)
        except json.JSONDecodeError as e:
            raise ConeSpecError(f"Cone spec {filename} is no valid JSON: {e}")
    return ConeStructure.from_spec(spec)


def dump_spec(structure, filename):
    with open(filename, "w") as f:
        json.dump(structure.to_spec(), f, indent=2)


class StructuredMatrix(object):
    """An element x of Z_V in block coordinates."""

    def __init__(self, structure, vector):
        v = np.array(vector, dtype=float).reshape(-1)
        if v.size != structure.dim:
            raise ConeSpecError(f"Expected {structure.dim} coordinates for {structure.name or 'cone'}, got {v.size}!")
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
    def diag(self):
        return self._vector[:self._structure.r]

    @property
    def offdiag(self):
        return {p: self._vector[self._structure.block_range(*p)] for p in self._structure.pairs}

    def block(self, l, k):
        """The n_l x n_k matrix X_lk."""
        c = self._structure
        coefs = self._vector[c.block_range(l, k)]
        shape = (c.n[l - 1], c.n[k - 1])
        return sum((a * b for a, b in zip(coefs, c.basis(l, k))), np.zeros(shape))

    @property
    def matrix(self):
        return self._structure.embed(self)

    def _same(self, other):
        if not isinstance(other, StructuredMatrix):
            return False
        if other.structure is not self._structure and other.structure != self._structure:
            raise ValueError("Elements belong to different cone structures!")
        return True

    def __add__(self, other):
        if not self._same(other):
            return NotImplemented
        return StructuredMatrix(self._structure, self._vector + other.vector)

    def __sub__(self, other):
        if not self._same(other):
            return NotImplemented
        return StructuredMatrix(self._structure, self._vector - other.vector)

    def __neg__(self):
        return StructuredMatrix(self._structure, -self._vector)

    def __mul__(self, scalar):
        return StructuredMatrix(self._structure, float(scalar) * self._vector)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return StructuredMatrix(self._structure, self._vector / float(scalar))

    def norm(self):
        return float(np.sqrt(inner_product(self, self)))

    def __repr__(self):
        return f"StructuredMatrix({np.array2string(self._vector, precision=6)})"


def embed(x):
    return x.structure.embed(x)


def project(structure, M):
    return structure.project(M)


def lower_part(x):
    """The lower triangular matrix x-check with x-check + x-check^T = embed(x)."""
    M = x.matrix
    return np.tril(M, -1) + np.diag(np.diag(M) / 2.0)


def check_closure(residual, scale, what, settings=DEFAULT):
    if residual > settings.closure_tol * max(scale, 1.0):
        logging.error(f"{what} left Z_V, residual {residual:.3e}")
        raise ClosureViolation(f"{what} is not closed in Z_V (residual {residual:.3e})!", residual=residual)


def triangle_product(x, y, settings=DEFAULT):
    """x △ y = x-check y + y x-hat, projected back to Z_V."""
    x._same(y)
    L = lower_part(x)
    Y = y.matrix
    M = L @ Y + Y @ L.T
    z, residual = x.structure.project(M)
    check_closure(residual, np.linalg.norm(M), "triangle product", settings)
    return z


def inner_product(x, y):
    """<x, y> = sum_k x_kk y_kk + 2 sum_{k<l} (X_lk|Y_lk)."""
    x._same(y)
    return float(np.dot(x.vector * x.structure.weights, y.vector))


class AxiomCheck(object):

    def __init__(self, name, passed=True, residual=0.0, witness=None):
        self._name = name
        self._passed = passed
        self._residual = residual
        self._witness = witness

    @property
    def name(self):
        return self._name

    @property
    def passed(self):
        return self._passed

    @property
    def residual(self):
        return self._residual

    @property
    def witness(self):
        return self._witness

    def to_dict(self):
        d = {"pass": self._passed, "max_residual": self._residual}
        if self._witness is not None:
            w = dict(self._witness)
            for key in ("A", "B", "product"):
                if key in w:
                    w[key] = np.asarray(w[key]).tolist()
            d["witness"] = w
        return d

    def __str__(self):
        s = f"{self._name}: {'pass' if self._passed else 'FAIL'} (max residual {self._residual:.2e})"
        if self._witness is not None:
            s += f", witness {self._witness['indices']}"
        return s


class AxiomReport(object):

    def __init__(self, structure, checks):
        self._structure = structure
        self._checks = {c.name: c for c in checks}

    @property
    def passed(self):
        return all(c.passed for c in self._checks.values())

    def __getitem__(self, name):
        return self._checks[name]

    def failures(self):
        return [c for c in self._checks.values() if not c.passed]

    def to_dict(self):
        return {name: c.to_dict() for name, c in self._checks.items()}

    def __str__(self):
        return "\n".join(str(c) for c in self._checks.values())


def _span_residual(structure, M, l, i):
    """Relative residual of M after projection onto span V_li (0 for M = 0)."""
    norm = np.linalg.norm(M)
    if norm == 0.0:
        return 0.0
    M = M / norm
    rest = M.copy()
    for b in structure.basis(l, i):
        rest = rest - block_inner(M, b) * b
    return float(np.linalg.norm(rest))


def _scalar_residual(S):
    norm = np.linalg.norm(S)
    if norm == 0.0:
        return 0.0
    S = S / norm
    return float(np.linalg.norm(S - np.trace(S) / S.shape[0] * np.eye(S.shape[0])))


def validate_axioms(structure, settings=DEFAULT):
    """Checks the closure conditions (V1)-(V3) on basis elements.

    Never raises; failing conditions carry the first witness found.
    """
    tol = settings.membership_tol
    r = structure.r
    found = {"V1": [0.0, None], "V2": [0.0, None], "V3": [0.0, None]}

    def record(name, residual, witness):
        entry = found[name]
        entry[0] = max(entry[0], residual)
        if residual > tol and entry[1] is None:
            logging.info(f"{name} fails at {witness['indices']} with residual {residual:.3e}")
            entry[1] = witness

    for i in range(1, r + 1):
        for k in range(i + 1, r + 1):
            for l in range(k + 1, r + 1):
                # (V1) A in V_lk, B in V_ki => AB in V_li
                for a, A in enumerate(structure.basis(l, k)):
                    for b, B in enumerate(structure.basis(k, i)):
                        P = A @ B
                        record("V1", _span_residual(structure, P, l, i),
                               {"indices": {"l": l, "k": k, "i": i, "a": a + 1, "b": b + 1},
                                "A": A, "B": B, "product": P})
                # (V2) A in V_li, B in V_ki => A B^T in V_lk
                for a, A in enumerate(structure.basis(l, i)):
                    for b, B in enumerate(structure.basis(k, i)):
                        P = A @ B.T
                        record("V2", _span_residual(structure, P, l, k),
                               {"indices": {"l": l, "k": k, "i": i, "a": a + 1, "b": b + 1},
                                "A": A, "B": B, "product": P})
    # (V3) A in V_lk => A A^T scalar; polarized over basis pairs
    for (l, k) in structure.pairs:
        basis = structure.basis(l, k)
        for a in range(len(basis)):
            for b in range(a, len(basis)):
                A, B = basis[a], basis[b]
                S = A @ B.T + B @ A.T
                record("V3", _scalar_residual(S),
                       {"indices": {"l": l, "k": k, "a": a + 1, "b": b + 1}, "A": A, "B": B, "product": S})

    checks = [AxiomCheck(name, entry[1] is None, entry[0], entry[1]) for name, entry in found.items()]
    return AxiomReport(structure, checks)


def require_valid(structure, settings=DEFAULT):
    report = validate_axioms(structure, settings)
    if not report.passed:
        names = [c.name for c in report.failures()]
        logging.error(f"Cone structure {structure.name} violates {names}")
        raise ClosureViolation(f"Cone structure {structure.name!r} violates {', '.join(names)}!", report=report)
    return report


def block_graph(structure):
    """Adjacency matrix on {1..r} with an edge {k, l} whenever dim V_lk > 0."""
    r = structure.r
    adjacency = np.zeros((r, r), dtype=int)
    for (l, k) in structure.pairs:
        if structure.block_dim(l, k) > 0:
            adjacency[l - 1, k - 1] = adjacency[k - 1, l - 1] = 1
    return adjacency


def components(structure):
    """Connected components of the block graph as lists of 1-based indices."""
    count, labels = connected_components(csr_matrix(block_graph(structure)), directed=False)
    return [[int(i) + 1 for i in np.flatnonzero(labels == c)] for c in range(count)]


def is_irreducible(structure):
    return len(components(structure)) == 1
