# -*- coding: utf-8 -*-
# Copyright © 2024, homocone developers
#
# All rights reserved.
#
# Redistribution and use in source and binary forms, with or without
# modification, are permitted under the terms of the BSD License. See
# LICENSE file in the root of the Project.
import os
import logging
import dataclasses

import odml
import numpy as np

from .util import parse_value


@dataclasses.dataclass(frozen=True)
class Settings:
    """Tolerances, iteration budgets and sampler knobs used across homocone.

    Every numerical threshold of the package is read from an instance of
    this record, the module level `DEFAULT` unless a caller passes its own.
    """
    membership_tol: float = 1e-9
    closure_tol: float = 1e-9
    gindikin_tol: float = 1e-9
    newton_max_iter: int = 200
    newton_tol: float = 1e-12
    newton_accept: float = 1e-8
    newton_max_halvings: int = 60
    fd_rel_step: float = 1e-5
    cocycle_tol: float = 1e-9
    character_tol: float = 1e-9
    flip_tol: float = 1e-10
    mc_sigma: float = 3.0
    sigma_candidate: str = "p"
    chunk_size: int = 8192
    workers: int = 1

    @classmethod
    def keys(cls):
        return [f.name for f in dataclasses.fields(cls)]

    def replace(self, **changes):
        unknown = [k for k in changes if k not in self.keys()]
        if len(unknown) > 0:
            raise KeyError(f"Unknown setting(s) {unknown}!")
        converted = {}
        for f in dataclasses.fields(self):
            if f.name in changes:
                converted[f.name] = self._coerce(f, changes[f.name])
        return dataclasses.replace(self, **converted)

    @staticmethod
    def _coerce(field, value):
        if isinstance(value, str):
            value = parse_value(value)
        if field.type in (int, "int"):
            return int(value)
        if field.type in (float, "float"):
            return float(value)
        return str(value)

    def with_overrides(self, assignments):
        """Applies ``key=value`` strings, e.g. from repeated ``--set`` flags."""
        changes = {}
        for a in assignments or []:
            if "=" not in a:
                raise ValueError(f"Setting {a!r} is not of the form key=value!")
            key, value = a.split("=", 1)
            changes[key.strip()] = value.strip()
        return self.replace(**changes)

    @classmethod
    def from_config(cls, config, base=None):
        """Collects all known keys found anywhere in a ConfigFile."""
        base = cls() if base is None else base
        changes = {}
        for section in config.iter_sections():
            for p in section.props:
                if p.name not in cls.keys():
                    logging.warning(f"Ignoring unknown setting {p.name} in section {section.name}!")
                    continue
                values = p.values
                changes[p.name] = values[0] if len(values) > 0 else None
        changes = {k: v for k, v in changes.items() if v is not None}
        return base.replace(**changes)

    def to_dict(self):
        return dataclasses.asdict(self)


DEFAULT = Settings()


class ConfigFile(object):
    """Indented ``key: value`` settings file read into an odml section tree.

    Sections are lines without a value (``Newton:``), their nesting is given
    by indentation. Lines starting with '#' are comments.
    """

    def __init__(self, filename=None):
        if filename is not None:
            self._root = odml.Section(name=os.path.split(filename)[-1])
            self.load(filename)
        else:
            self._root = odml.Section(name="Root")

    def __getitem__(self, key):
        if key in self._root.sections:
            return self._root[key]
        elif key in self._root.properties:
            return self._root.properties[key]
        return None

    def iter_sections(self, section=None):
        section = self._root if section is None else section
        yield section
        for s in section.sections:
            yield from self.iter_sections(s)

    def empty_or_comment(self, line):
        return len(line.strip()) == 0 or line.strip()[0] == '#'

    def looks_like_property(self, line):
        parts = line.strip().split(":", 1)
        return len(parts) == 2 and len(parts[1].strip()) > 0

    def looks_like_section(self, line):
        return not self.empty_or_comment(line) and not self.looks_like_property(line)

    def guess_indentation(self, filename):
        indentations = set()
        with open(filename, 'r') as f:
            for line in f:
                if self.empty_or_comment(line):
                    continue
                indentations.add(len(line) - len(line.lstrip(" ")))
        indentations = sorted(list(indentations))
        if len(indentations) > 2:
            indent = np.unique(np.diff(np.array(indentations)))
            if len(indent) > 1:
                raise ValueError(f"Indentation levels inconsistent! {indent}")
            indent = int(indent[0])
        elif len(indentations) == 2:
            indent = indentations[-1] - indentations[0]
        else:
            indent = 1
        return indent

    def parse_property(self, line):
        key, val = line.split(':', 1)
        return key.strip(), parse_value(val)

    def read_config_file(self, filename, indent=2):
        current_section = self._root
        current_level = 0
        with open(filename, 'r') as f:
            for line in f:
                if self.empty_or_comment(line):
                    continue
                level = (len(line) - len(line.lstrip(" "))) // indent
                if self.looks_like_section(line):
                    name = line.strip().strip(":").strip()
                    while current_level > level and current_section.parent is not None:
                        current_section = current_section.parent
                        current_level -= 1
                    logging.debug(f"new section {name} in {current_section.name}")
                    current_section = current_section.create_section(name=name)
                    current_level = level + 1
                    continue
                while current_level > level and current_section.parent is not None:
                    current_section = current_section.parent
                    current_level -= 1
                key, value = self.parse_property(line)
                logging.debug(f"\tadd {key} to section {current_section.name}!")
                current_section.create_property(name=key, values=[value])

    def load(self, filename):
        if not os.path.exists(filename):
            logging.error(f"Config file {filename} does not exist!")
            raise ValueError(f"File {filename} does not exist!")
        self.read_config_file(filename, self.guess_indentation(filename))
