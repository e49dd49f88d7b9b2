import os
import re
import enum

import numpy as np


class ValueType(enum.Enum):
    floating = 1
    integer = 2
    boolean = 3
    string = 4


integer_number = re.compile("^[+-]?\\d+$")
only_number = re.compile("^[+-]?(\\d+\\.?\\d*|\\.\\d+)([eE][+-]?\\d+)?$")
boolean_value = re.compile("^(true|false|yes|no|on|off)$", re.IGNORECASE)


def guess_value_type(value_str):
    value_str = value_str.strip()
    if integer_number.search(value_str) is not None:
        return ValueType.integer
    if only_number.search(value_str) is not None:
        return ValueType.floating
    if boolean_value.search(value_str) is not None:
        return ValueType.boolean
    return ValueType.string


def convert_value(val, val_type):
    if val_type == ValueType.integer:
        val = int(val)
    elif val_type == ValueType.floating:
        val = float(val)
    elif val_type == ValueType.boolean:
        val = val.strip().lower() in ("true", "yes", "on")
    return val


def parse_value(value_str):
    """Converts a configuration or command line string to int, float, bool or str."""
    value_str = value_str.strip().strip('"')
    return convert_value(value_str, guess_value_type(value_str))


def parse_reals(text):
    """Reads a vector of reals.

    Parameters
    ----------
    text: str
        Either comma separated reals ("2,2,0.5") or the name of a file that
        holds reals separated by commas, whitespace or newlines.

    Returns
    -------
    numpy.ndarray
        1-D float array.
    """
    if os.path.isfile(text):
        with open(text, "r") as f:
            text = f.read()
    parts = [p for p in re.split("[,\\s]+", text.strip()) if len(p) > 0]
    values = []
    for p in parts:
        if guess_value_type(p) not in (ValueType.integer, ValueType.floating):
            raise ValueError(f"Cannot read {p!r} as a real number!")
        values.append(float(p))
    return np.array(values, dtype=float)


def odml2nix(odml_section, nix_section):
    """Copies an odml section tree into a nix section, recursively."""
    for op in odml_section.props:
        values = list(op.values)
        if len(values) == 0:
            continue
        nixp = nix_section.create_property(op.name, values)
        if op.unit is not None:
            nixp.unit = op.unit
    for osec in odml_section.sections:
        name = osec.name.replace("/", "_")
        nsec = nix_section.create_section(name, osec.type if osec.type else "homocone.metadata")
        odml2nix(osec, nsec)
