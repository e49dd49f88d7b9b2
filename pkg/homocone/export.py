# -*- coding: utf-8 -*-
# Copyright © 2024, homocone developers
#
# All rights reserved.
#
# Redistribution and use in source and binary forms, with or without
# modification, are permitted under the terms of the BSD License. See
# LICENSE file in the root of the Project.
import os
import json
import logging

import odml
import nixio as nix

from .errors import OutputExists
from .util import odml2nix


def check_output(filename, force=False):
    logging.debug(f"Checking output name: {filename}!")
    if os.path.exists(filename):
        logging.warning(f"Output file name {filename} already exists!")
        if force:
            logging.warning(f"... force flag is set {force}, going to overwrite!")
        else:
            logging.error(f"Force flag is not set ({force}), abort!")
            raise OutputExists(f"Output file {filename} already exists! If you want to overwrite it use the --force flag.",
                               filename=filename)
    logging.debug("... ok!")
    return True


def sidecar_name(filename):
    return f"{filename}.json"


def batch_metadata(batch):
    meta = batch.metadata()
    meta["eps"] = list(batch.eps)
    meta["coordinates"] = batch.structure.coordinate_labels()
    return meta


def write_json(obj, filename, force=False):
    check_output(filename, force)
    with open(filename, "w") as f:
        json.dump(obj, f, sort_keys=True, indent=2)
        f.write("\n")


def csv_lines(batch):
    """One header row with the Z_V coordinate labels, then one sample per row."""
    yield ",".join(batch.structure.coordinate_labels())
    for v in batch.vectors:
        yield ",".join(repr(float(a)) for a in v)


def write_csv(batch, filename, force=False):
    """Writes the batch as CSV plus the JSON sidecar `<filename>.json`."""
    check_output(filename, force)
    check_output(sidecar_name(filename), force)
    logging.info(f"Writing {batch.count} samples to {filename}")
    with open(filename, "w") as f:
        for line in csv_lines(batch):
            f.write(line + "\n")
    write_json(batch_metadata(batch), sidecar_name(filename), force=True)


def read_csv(filename):
    """Header labels and rows of a batch written by write_csv."""
    with open(filename, "r") as f:
        labels = f.readline().strip().split(",")
        rows = [[float(a) for a in line.strip().split(",")] for line in f if len(line.strip()) > 0]
    return labels, rows


def metadata_section(batch, settings=None):
    """The batch description as an odml section tree."""
    sec = odml.Section(name="batch", type="homocone.batch")
    meta = batch.metadata()
    odml.Property(name="cone", values=[meta["cone"] or "unnamed"], parent=sec)
    odml.Property(name="s", values=meta["s"], parent=sec)
    odml.Property(name="theta", values=meta["theta"], parent=sec)
    odml.Property(name="seed", values=[int(meta["seed"])], parent=sec)
    odml.Property(name="n", values=[int(meta["n"])], parent=sec)
    odml.Property(name="eps", values=[int(e) for e in batch.eps], parent=sec)
    if settings is not None:
        sub = odml.Section(name="settings", type="homocone.settings", parent=sec)
        for key, value in settings.to_dict().items():
            odml.Property(name=key, values=[value], parent=sub)
    return sec


def write_nix(batch, filename, force=False, settings=None):
    """Stores the batch as DataArray 'samples' in block 'homocone.batch' of a NIX file."""
    check_output(filename, force)
    logging.info(f"Creating output file {filename} ...")
    nixfile = nix.File.open(filename, nix.FileMode.Overwrite)
    try:
        block = nixfile.create_block("homocone.batch", "homocone.batch")
        sec = nixfile.create_section("homocone.batch", "homocone.batch")
        block.metadata = sec
        odml2nix(metadata_section(batch, settings), sec)
        da = block.create_data_array("samples", "homocone.samples", dtype=nix.DataType.Double, data=batch.vectors)
        da.append_set_dimension()
        da.append_set_dimension(labels=batch.structure.coordinate_labels())
        da.metadata = sec
    finally:
        nixfile.close()


def write_batch(batch, filename, fmt="csv", force=False, settings=None):
    if fmt == "csv":
        write_csv(batch, filename, force)
    elif fmt == "nix":
        write_nix(batch, filename, force, settings)
    else:
        raise ValueError(f"Unknown output format {fmt!r}, use csv or nix!")
