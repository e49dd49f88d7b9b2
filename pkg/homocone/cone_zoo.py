# -*- coding: utf-8 -*-
# Copyright © 2024, homocone developers
#
# All rights reserved.
#
# Redistribution and use in source and binary forms, with or without
# modification, are permitted under the terms of the BSD License. See
# LICENSE file in the root of the Project.
"""Built-in cone structures."""
import os
import re
import logging

import numpy as np

from .cone_model import ConeStructure, load_spec, require_valid
from .errors import ConeSpecError


def _validated(structure):
    require_valid(structure)
    return structure


def sym_cone(r):
    """Sym_+(r): partition (1, ..., 1) and V_lk = R for all l > k."""
    r = int(r)
    if r < 1:
        raise ConeSpecError(f"Rank must be positive, got {r}!")
    blocks = {(l, k): [np.ones((1, 1))] for l in range(2, r + 1) for k in range(1, l)}
    return _validated(ConeStructure([1] * r, blocks, f"sym{r}"))


def lorentz_cone(m):
    """Lorentz cone of dimension m + 2, realized with partition (m, 1) and V_21 = Mat(1, m)."""
    m = int(m)
    if m < 1:
        raise ConeSpecError(f"Lorentz cone needs m >= 1, got {m}!")
    rows = [np.eye(m)[j:j + 1, :] for j in range(m)]
    return _validated(ConeStructure([m, 1], {(2, 1): rows}, f"lorentz{m}"))


def vinberg_cone():
    """The five dimensional Vinberg cone: V_21 = {0}, V_31 = V_32 = R."""
    blocks = {(3, 1): [np.ones((1, 1))], (3, 2): [np.ones((1, 1))]}
    return _validated(ConeStructure([1, 1, 1], blocks, "vinberg"))


def vinberg_mirrored():
    """V_21 = V_31 = R, V_32 = {0}: violates the closure axioms."""
    blocks = {(2, 1): [np.ones((1, 1))], (3, 1): [np.ones((1, 1))]}
    return ConeStructure([1, 1, 1], blocks, "vinberg-mirrored")


def chain_cone():
    """V_21 = V_32 = R, V_31 = {0}: the product of the two nonzero blocks has nowhere to go (V1)."""
    one = [np.ones((1, 1))]
    return ConeStructure([1, 1, 1], {(2, 1): one, (3, 2): one}, "chain")


def direct_sum(c1, c2):
    """c1 + c2 with all cross blocks zero."""
    r1 = c1.r
    blocks = {}
    for (l, k) in c1.pairs:
        if c1.block_dim(l, k) > 0:
            blocks[(l, k)] = list(c1.basis(l, k))
    for (l, k) in c2.pairs:
        if c2.block_dim(l, k) > 0:
            blocks[(l + r1, k + r1)] = list(c2.basis(l, k))
    name = f"{c1.name}+{c2.name}"
    return _validated(ConeStructure(list(c1.n) + list(c2.n), blocks, name))


def half_line_pair():
    """The reducible cone R+ x R+."""
    return _validated(ConeStructure([1, 1], {}, "half-line-pair"))


_PATTERNS = [
    (re.compile(r"^sym(\d+)$"), lambda m: sym_cone(int(m.group(1)))),
    (re.compile(r"^lorentz(\d+)$"), lambda m: lorentz_cone(int(m.group(1)))),
    (re.compile(r"^vinberg$"), lambda m: vinberg_cone()),
    (re.compile(r"^vinberg-mirrored$"), lambda m: vinberg_mirrored()),
    (re.compile(r"^half-line-pair$"), lambda m: half_line_pair()),
    (re.compile(r"^chain$"), lambda m: chain_cone()),
]


def names():
    return ["sym<r>", "lorentz<m>", "vinberg", "vinberg-mirrored", "half-line-pair", "chain"]


def by_name(name):
    """A zoo cone by name, or a cone spec read from a JSON file."""
    for pattern, build in _PATTERNS:
        match = pattern.match(name.strip())
        if match is not None:
            return build(match)
    if os.path.exists(name):
        logging.info(f"Reading cone spec from {name}")
        return load_spec(name)
    raise ConeSpecError(f"Unknown cone {name!r}; use one of {', '.join(names())} or a cone spec file!")
