# -*- coding: utf-8 -*-
#! python3

"""
    Parameter checkpoints: flat vector + segment map + MLP specs in a versioned
    JSON text file. Floats are written with ``repr`` so a reload is bit-exact.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import json
import logging
from pathlib import Path

# 3rd party library
import arrow
import numpy as np

# submodules
from pil_lab.autodiff.mlp import MlpSpec
from pil_lab.autodiff.params import ParamStore
from pil_lab.utils.errors import DatasetFormatError

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "pil-lab-checkpoint"
CHECKPOINT_VERSION = 1

# #############################################################################
# ########## Functions #############
# ##################################


def save_checkpoint(path: Path, store: ParamStore, specs: dict, meta: dict = None) -> Path:
    """Write parameters to ``path``.

    :param pathlib.Path path: output file
    :param ParamStore store: parameters to save
    :param dict specs: segment name -> :class:`MlpSpec`
    :param dict meta: free metadata (training config, seed...)
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "created": arrow.utcnow().isoformat(),
        "segments": store.segment_map(),
        "specs": {name: spec.asDict() for name, spec in specs.items()},
        "meta": meta or {},
        "flat": [repr(float(v)) for v in store.flat],
    }
    path.write_text(json.dumps(payload, indent=1, sort_keys=True), encoding="utf-8")
    logger.info("Checkpoint saved: {} ({} parameters)".format(path, len(store)))
    return path


def load_checkpoint(path: Path) -> tuple:
    """Read a checkpoint written by :func:`save_checkpoint`.

    :param pathlib.Path path: checkpoint file

    :return: (ParamStore, {segment: MlpSpec}, meta)
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetFormatError("checkpoint not found: {}".format(path))
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except ValueError as err:
        raise DatasetFormatError("checkpoint {} is not valid JSON: {}".format(path, err))
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise DatasetFormatError("{} is not a pil-lab checkpoint".format(path))
    if payload.get("version") != CHECKPOINT_VERSION:
        raise DatasetFormatError(
            "unsupported checkpoint version {} (expected {})".format(
                payload.get("version"), CHECKPOINT_VERSION
            )
        )

    store = ParamStore()
    for name, (start, stop) in sorted(payload["segments"].items(), key=lambda kv: kv[1][0]):
        if store.add_segment(name, stop - start) != start:
            raise DatasetFormatError("segments of {} are not contiguous".format(path))
    flat = np.array([float(v) for v in payload["flat"]])
    if flat.shape[0] != len(store):
        raise DatasetFormatError(
            "checkpoint {} holds {} values, segments cover {}".format(path, flat.shape[0], len(store))
        )
    store.load_flat(flat)
    specs = {name: MlpSpec(**spec) for name, spec in payload["specs"].items()}
    return store, specs, payload.get("meta", {})
