# -*- coding: utf-8 -*-
# Copyright © 2024, homocone developers
#
# All rights reserved.
#
# Redistribution and use in source and binary forms, with or without
# modification, are permitted under the terms of the BSD License. See
# LICENSE file in the root of the Project.
"""Command line front end.

Points, parameters and sign vectors are comma separated reals (or the name
of a file holding them). Elements of Z_V are given in coordinate order:
the r diagonal scalars first, then the block coefficients sorted by
(l, k, j); -I_2 on sym2 is therefore `-1,-1,0`.

Exit codes: 0 all checks passed, 1 a check failed, 2 bad input.
"""
import os
import re
import sys
import json
import logging
import argparse

import numpy as np

from . import cone_zoo
from .config import ConfigFile, Settings
from .cone_model import components, is_irreducible, validate_axioms
from .errors import HomoconeError
from .export import check_output, csv_lines, write_batch, write_json
from .info import version_string
from .nef_invariance import characterization_audit
from .power_riesz import (as_parameter, bridge_vector, dual_power, flip_midpoint, flipped_signs, primal_midpoint,
                          sign_matrix, support_flags)
from .triangular_group import cholesky_structured, dual_decompose, random_element, rho_apply
from .util import parse_reals
from .wishart_sampler import (chunk_generator, closed_form_laplace, empirical_laplace, laplace_points, sample_singular,
                              sample_wishart)

VECTOR_OPTIONS = ("--s", "--theta", "--theta0", "--point", "--xi", "--eps")
number_list = re.compile("^-[\\d.][\\d.eE+\\-,\\s]*$")


def default_seed():
    value = os.environ.get("HOMOCONE_SEED")
    if value is None or len(value.strip()) == 0:
        return 42
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"HOMOCONE_SEED must be an integer, got {value!r}!")


def common_parser():
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("cone", type=str, help="Zoo cone (sym<r>, lorentz<m>, vinberg, vinberg-mirrored, half-line-pair, chain) or a cone spec JSON file")
    parser.add_argument("-l", "--logger", type=str, default="WARN", help="Log level. One of {WARN, INFO, DEBUG, ERROR}, default: WARN")
    parser.add_argument("--config", type=str, default=None, help="Settings file with 'key: value' lines, e.g. 'newton_tol: 1e-13'")
    parser.add_argument("--set", dest="overrides", action="append", default=[], help="Overrides a single setting, key=value. May be repeated.")
    parser.add_argument("-o", "--output", type=str, default=None, help="Output file; the report is printed if not given")
    parser.add_argument("-f", "--force", action="store_true", help="Overwrite existing output files.")
    return parser


def create_parser():
    """Create the command line parser

    Returns:
        argparse.ArgumentParser: the parser
    """
    common = common_parser()
    parser = argparse.ArgumentParser(prog="homocone", description="Homogeneous cones, Riesz measures and the exponential families they generate.",
                                     epilog="Elements of Z_V are entered in coordinate order: diagonals first, then block coefficients sorted by (l, k, j).")
    parser.add_argument("--version", action="version", version=version_string())
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="Check the closure axioms V1-V3 and irreducibility")

    p = sub.add_parser("decompose", parents=[common], help="T with rho(T) I = x")
    p.add_argument("--point", type=str, required=True, help="Point x of Z_V")

    p = sub.add_parser("dual-decompose", parents=[common], help="T with rho*(T) I = xi")
    p.add_argument("--point", "--xi", dest="point", type=str, required=True, help="Point xi of Z_V")

    p = sub.add_parser("power", parents=[common], help="Generalized power Delta*_s(xi)")
    p.add_argument("--s", type=str, required=True, help="Parameter s, r reals")
    p.add_argument("--xi", type=str, required=True, help="Point xi of the dual cone")

    p = sub.add_parser("gindikin", parents=[common], help="Stratum of s in the Gindikin-Wallach set")
    p.add_argument("--s", type=str, required=True, help="Parameter s, r reals")

    p = sub.add_parser("sample", parents=[common], help="Draw Wishart samples")
    p.add_argument("--s", type=str, required=True, help="Parameter s, r reals")
    p.add_argument("--theta", type=str, default=None, help="Canonical parameter theta, default -I")
    p.add_argument("-n", "--count", type=int, default=100000, help="Number of samples, default: 100000")
    p.add_argument("--seed", type=int, default=None, help="Seed, default: 42 or $HOMOCONE_SEED")
    p.add_argument("--workers", type=int, default=None, help="Worker threads; the samples do not depend on it")
    p.add_argument("--format", type=str, choices=["csv", "nix"], default="csv", help="Output format, default: csv")

    p = sub.add_parser("laplace-check", parents=[common], help="Compare empirical and closed form Laplace transforms")
    p.add_argument("--s", type=str, required=True, help="Parameter s, r reals")
    p.add_argument("-n", "--count", type=int, default=100000, help="Number of samples, default: 100000")
    p.add_argument("--seed", type=int, default=None, help="Seed, default: 42 or $HOMOCONE_SEED")
    p.add_argument("--workers", type=int, default=None, help="Worker threads")

    p = sub.add_parser("audit", parents=[common], help="Audit the invariance characterization")
    p.add_argument("--s", type=str, required=True, help="Parameter s, r reals")
    p.add_argument("--theta0", type=str, default=None, help="Tilt theta0, default 0")
    p.add_argument("--reflected", action="store_true", help="Use R_s(-dx)")
    p.add_argument("-n", "--count", type=int, default=100000, help="Number of samples, default: 100000")
    p.add_argument("--seed", type=int, default=None, help="Seed, default: 42 or $HOMOCONE_SEED")
    p.add_argument("--workers", type=int, default=None, help="Worker threads")

    p = sub.add_parser("flip-demo", parents=[common], help="Midpoint of the flip through V_lk")
    p.add_argument("--eps", type=str, required=True, help="Sign vector, entries -1, 0 or 1")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--seed", type=int, default=None, help="Seed of the primal test point")
    return parser


def join_negative_values(argv):
    """Turns `--theta -1,-1,0` into `--theta=-1,-1,0` so argparse does not take the value for a flag."""
    joined = []
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg in VECTOR_OPTIONS and i + 1 < len(argv) and number_list.match(argv[i + 1]):
            joined.append(f"{arg}={argv[i + 1]}")
            i += 2
            continue
        joined.append(arg)
        i += 1
    return joined


def set_log_level(level_name):
    level_name = level_name.upper()
    if level_name not in logging._nameToLevel:
        raise ValueError(f"Unknown log level {level_name}!")
    logging.basicConfig(level=logging._nameToLevel[level_name], force=True)


def load_settings(args):
    settings = Settings()
    if args.config is not None:
        settings = Settings.from_config(ConfigFile(args.config), settings)
    settings = settings.with_overrides(args.overrides)
    if getattr(args, "workers", None) is not None:
        settings = settings.replace(workers=args.workers)
    return settings


def element(structure, text):
    return structure.element(parse_reals(text))


def emit(report, args):
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.output is None:
        print(text)
    else:
        write_json(report, args.output, args.force)


def _triangular_report(structure, T):
    return {"cone": structure.name, "labels": structure.coordinate_labels(),
            "T": [float(v) for v in T.vector]}


def cmd_validate(structure, args, settings):
    report = validate_axioms(structure, settings)
    result = {"cone": structure.name, "pass": report.passed, "axioms": report.to_dict(),
              "irreducible": is_irreducible(structure), "components": components(structure)}
    for failure in report.failures():
        logging.info(str(failure))
    emit(result, args)
    return 0 if report.passed else 1


def cmd_decompose(structure, args, settings):
    emit(_triangular_report(structure, cholesky_structured(element(structure, args.point), settings)), args)
    return 0


def cmd_dual_decompose(structure, args, settings):
    emit(_triangular_report(structure, dual_decompose(element(structure, args.point), settings)), args)
    return 0


def cmd_power(structure, args, settings):
    s = parse_reals(args.s)
    value = dual_power(s, element(structure, args.xi), settings)
    emit({"cone": structure.name, "s": s.tolist(), "value": value}, args)
    return 0


def cmd_gindikin(structure, args, settings):
    s = as_parameter(parse_reals(args.s), structure, settings)
    result = {"cone": structure.name, "s": s.s.tolist(), "member": s.in_gindikin_set()}
    if s.in_gindikin_set():
        result["eps"] = list(s.classification)
        result["p"] = s.p.tolist()
        result["support"] = support_flags(structure, s, settings).to_dict()
    emit(result, args)
    return 0 if s.in_gindikin_set() else 1


def cmd_sample(structure, args, settings):
    s = as_parameter(parse_reals(args.s), structure, settings)
    theta = None if args.theta is None else element(structure, args.theta)
    seed = default_seed() if args.seed is None else args.seed
    if args.output is not None:
        check_output(args.output, args.force)
    if s.in_gindikin_set() and not s.is_regular():
        batch = sample_singular(structure, s, s.classification, args.count, seed, theta, settings)
    else:
        batch = sample_wishart(structure, s, theta, args.count, seed, settings)
    if args.output is None:
        for line in csv_lines(batch):
            print(line)
    else:
        write_batch(batch, args.output, args.format, args.force, settings)
    return 0


def cmd_laplace_check(structure, args, settings):
    s = as_parameter(parse_reals(args.s), structure, settings)
    seed = default_seed() if args.seed is None else args.seed
    batch = sample_wishart(structure, s, None, args.count, seed, settings)
    rows = []
    for label, eta in laplace_points(structure):
        estimate = empirical_laplace(batch, eta)
        exact = closed_form_laplace(batch, eta, settings)
        deviation = abs(estimate.estimate - exact)
        rows.append({"eta": label, "estimate": estimate.estimate, "std_error": estimate.std_error, "exact": exact,
                     "sigmas": deviation / estimate.std_error if estimate.std_error > 0 else 0.0,
                     "pass": bool(deviation <= settings.mc_sigma * estimate.std_error)})
    passed = all(row["pass"] for row in rows)
    emit({"cone": structure.name, "s": s.s.tolist(), "n": args.count, "seed": seed,
          "sigma_candidate": settings.sigma_candidate, "pass": passed, "points": rows}, args)
    return 0 if passed else 1


def cmd_audit(structure, args, settings):
    seed = default_seed() if args.seed is None else args.seed
    theta0 = None if args.theta0 is None else element(structure, args.theta0)
    report = characterization_audit(structure, parse_reals(args.s), theta0, args.reflected, args.count, seed, settings)
    emit(report.to_dict(), args)
    return 0 if report.passed else 1


def cmd_flip_demo(structure, args, settings):
    eps = [int(e) for e in parse_reals(args.eps)]
    k, l = args.k, args.l
    v = bridge_vector(structure, k, l)
    midpoint = flip_midpoint(structure, eps, k, l, v, settings)
    target = sign_matrix(structure, flipped_signs(eps, k, l))
    residual = float(np.max(np.abs((midpoint - target).vector)))
    seed = default_seed() if args.seed is None else args.seed
    x = rho_apply(random_element(structure, chunk_generator(seed, 0)), structure.identity(), settings)
    x_v = primal_midpoint(x, k, l, v, settings)
    expected = x.vector.copy()
    expected[l - 1] = 2.0 * x.diag[k - 1] + x.diag[l - 1]
    primal_residual = float(np.max(np.abs(x_v.vector - expected)))
    passed = residual <= settings.flip_tol and primal_residual <= settings.flip_tol * max(1.0, x.norm())
    emit({"cone": structure.name, "eps": eps, "k": k, "l": l, "eps_prime": list(flipped_signs(eps, k, l)),
          "midpoint": midpoint.vector.tolist(), "residual": residual,
          "primal": {"x": x.vector.tolist(), "x_v": x_v.vector.tolist(), "residual": primal_residual},
          "pass": passed}, args)
    return 0 if passed else 1


COMMANDS = {"validate": cmd_validate, "decompose": cmd_decompose, "dual-decompose": cmd_dual_decompose,
            "power": cmd_power, "gindikin": cmd_gindikin, "sample": cmd_sample,
            "laplace-check": cmd_laplace_check, "audit": cmd_audit, "flip-demo": cmd_flip_demo}


def run(argv=None):
    """Runs one command and returns the exit code."""
    parser = create_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(join_negative_values(argv))
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    try:
        set_log_level(args.logger)
        settings = load_settings(args)
        structure = cone_zoo.by_name(args.cone)
        logging.info(f"homocone {args.command} on {structure.name}")
        return COMMANDS[args.command](structure, args, settings)
    except (HomoconeError, ValueError, KeyError) as e:
        logging.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
