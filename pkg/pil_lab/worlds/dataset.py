# -*- coding: utf-8 -*-
#! python3

"""
    Expert trajectory containers and their CSV + sidecar metadata format.

    A dataset keeps the true states and inputs next to the noisy measurements:
    the evaluation and the coverage check read the former, learners only ever
    receive an :class:`ObservationView` exposing the latter.

    Storage convention: a trajectory of length T holds T+1 states (x, y, xi)
    and T inputs (u, v, eta); the last state has no action.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

# 3rd party library
import arrow
import numpy as np

# submodules
from pil_lab.reporters.csv_reporter import CsvReporter, read_csv_rows
from pil_lab.utils.errors import DatasetFormatError, ShapeError

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

META_SUFFIX = ".meta.json"

# #############################################################################
# ########## Classes ###############
# ##################################


@dataclass(frozen=True)
class Trajectory:
    """One expert (or learned) trajectory.

    :param np.ndarray x: true states, shape (T+1, n)
    :param np.ndarray u: true inputs, shape (T, m)
    :param np.ndarray y: state measurements, shape (T+1, p), p == n unless encoded
    :param np.ndarray v: input measurements, shape (T, m)
    :param np.ndarray xi: state noise records on the raw state, shape (T+1, n)
    :param np.ndarray eta: input noise records, shape (T, m)
    """

    x: np.ndarray
    u: np.ndarray
    y: np.ndarray
    v: np.ndarray
    xi: np.ndarray = None
    eta: np.ndarray = None

    @property
    def T(self) -> int:
        return self.u.shape[0]


@dataclass(frozen=True)
class ObservationView:
    """What a learner is allowed to see: measurements only.

    :param np.ndarray y: shape (N, T+1, p)
    :param np.ndarray v: shape (N, T, m)
    :param dict meta: dataset metadata (dimensions, encoder kind...)
    """

    y: np.ndarray
    v: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n_traj(self) -> int:
        return self.y.shape[0]

    @property
    def T(self) -> int:
        return self.v.shape[1]

    @property
    def obs_dim(self) -> int:
        return self.y.shape[2]

    @property
    def input_dim(self) -> int:
        return self.v.shape[2]


class TrajectoryDataset(object):
    """Immutable set of trajectories sharing dimensions and length.

    :param np.ndarray x: true states, shape (N, T+1, n)
    :param np.ndarray u: true inputs, shape (N, T, m)
    :param np.ndarray y: measurements, shape (N, T+1, p)
    :param np.ndarray v: input measurements, shape (N, T, m)
    :param np.ndarray xi: state noise records, shape (N, T+1, n), optional
    :param np.ndarray eta: input noise records, shape (N, T, m), optional
    :param dict meta: metadata (noise models, seed, expert descriptor...)
    """

    def __init__(
        self,
        x: np.ndarray,
        u: np.ndarray,
        y: np.ndarray,
        v: np.ndarray,
        xi: np.ndarray = None,
        eta: np.ndarray = None,
        meta: dict = None,
    ):
        x, u, y, v = (np.array(a, dtype=np.float64) for a in (x, u, y, v))
        if x.ndim != 3 or u.ndim != 3 or y.ndim != 3 or v.ndim != 3:
            raise ShapeError("dataset arrays must be 3-D (trajectory, time, coordinate)")
        n_traj, t_plus_1, n = x.shape
        T = t_plus_1 - 1
        m = u.shape[2]
        if u.shape[:2] != (n_traj, T) or v.shape != u.shape:
            raise ShapeError(
                "inputs must have shape ({}, {}, m), got u {} v {}".format(
                    n_traj, T, u.shape, v.shape
                )
            )
        if y.shape[:2] != (n_traj, t_plus_1):
            raise ShapeError(
                "measurements must have shape ({}, {}, p), got {}".format(
                    n_traj, t_plus_1, y.shape
                )
            )
        if xi is not None:
            xi = np.array(xi, dtype=np.float64)
            if xi.shape != x.shape:
                raise ShapeError("xi records {} do not match states {}".format(xi.shape, x.shape))
        if eta is not None:
            eta = np.array(eta, dtype=np.float64)
            if eta.shape != u.shape:
                raise ShapeError("eta records {} do not match inputs {}".format(eta.shape, u.shape))

        for arr in (x, u, y, v, xi, eta):
            if arr is not None:
                arr.setflags(write=False)
        self.x, self.u, self.y, self.v, self.xi, self.eta = x, u, y, v, xi, eta

        meta = dict(meta or {})
        meta.update({"n": n, "m": m, "p": y.shape[2], "T": T, "n_traj": n_traj})
        meta.setdefault("encoder", "raw")
        self.meta = meta

    def __len__(self):
        return self.x.shape[0]

    def __repr__(self):
        return "TrajectoryDataset(n_traj={n_traj}, T={T}, n={n}, m={m}, p={p})".format(
            **self.meta
        )

    def __getitem__(self, index: int) -> Trajectory:
        return Trajectory(
            x=self.x[index],
            u=self.u[index],
            y=self.y[index],
            v=self.v[index],
            xi=None if self.xi is None else self.xi[index],
            eta=None if self.eta is None else self.eta[index],
        )

    @property
    def trajectories(self) -> list:
        return [self[i] for i in range(len(self))]

    @property
    def T(self) -> int:
        return self.meta["T"]

    @property
    def has_noise_records(self) -> bool:
        return self.xi is not None and self.eta is not None

    def observations(self) -> ObservationView:
        """Measurement-only view handed to learners."""
        return ObservationView(y=self.y, v=self.v, meta=dict(self.meta))

    @classmethod
    def from_trajectories(cls, trajectories: list, meta: dict = None) -> "TrajectoryDataset":
        """Stack a list of :class:`Trajectory` sharing dimensions and length."""
        if not trajectories:
            raise ValueError("cannot build a dataset from an empty trajectory list")
        with_noise = all(t.xi is not None and t.eta is not None for t in trajectories)
        return cls(
            x=np.stack([t.x for t in trajectories]),
            u=np.stack([t.u for t in trajectories]),
            y=np.stack([t.y for t in trajectories]),
            v=np.stack([t.v for t in trajectories]),
            xi=np.stack([t.xi for t in trajectories]) if with_noise else None,
            eta=np.stack([t.eta for t in trajectories]) if with_noise else None,
            meta=meta,
        )


# #############################################################################
# ########## Functions #############
# ##################################


def meta_path_for(csvpath: Path) -> Path:
    """Sidecar metadata path of a CSV artifact: ``name.csv`` -> ``name.meta.json``."""
    csvpath = Path(csvpath)
    return csvpath.with_name(csvpath.stem + META_SUFFIX)


def write_metadata(csvpath: Path, meta: dict) -> Path:
    """Write the sidecar metadata of a CSV artifact, stamped with its creation date."""
    out = dict(meta)
    out.setdefault("created", arrow.utcnow().isoformat())
    path = meta_path_for(csvpath)
    path.write_text(json.dumps(out, indent=2, sort_keys=True, default=_json_default), "utf-8")
    return path


def read_metadata(csvpath: Path) -> dict:
    """Read the sidecar metadata of a CSV artifact."""
    path = meta_path_for(csvpath)
    if not path.is_file():
        raise DatasetFormatError("metadata file not found: {}".format(path))
    try:
        return json.loads(path.read_text("utf-8"))
    except ValueError as err:
        raise DatasetFormatError("invalid metadata file {}: {}".format(path, err))


def dataset_headers(n: int, m: int, p: int, with_noise: bool = True) -> list:
    """Column names of the dataset CSV."""
    headers = ["traj", "t"]
    headers += ["y_{}".format(i) for i in range(p)]
    headers += ["v_{}".format(i) for i in range(m)]
    headers += ["x_{}".format(i) for i in range(n)]
    headers += ["u_{}".format(i) for i in range(m)]
    if with_noise:
        headers += ["xi_{}".format(i) for i in range(n)]
        headers += ["eta_{}".format(i) for i in range(m)]
    return headers


def write_dataset(dataset: TrajectoryDataset, csvpath: Path) -> Path:
    """Serialize a dataset as one CSV (one row per trajectory and time step) + metadata.

    :param TrajectoryDataset dataset: dataset to write
    :param pathlib.Path csvpath: output CSV path
    """
    csvpath = Path(csvpath)
    meta = dataset.meta
    n, m, p, T = meta["n"], meta["m"], meta["p"], meta["T"]
    with_noise = dataset.has_noise_records
    headers = dataset_headers(n, m, p, with_noise)
    reporter = CsvReporter(csvpath=csvpath, headers=headers)

    rows = []
    for k in range(len(dataset)):
        for t in range(T + 1):
            row = {"traj": k, "t": t}
            last = t == T
            for i in range(p):
                row["y_{}".format(i)] = dataset.y[k, t, i]
            for i in range(n):
                row["x_{}".format(i)] = dataset.x[k, t, i]
            for i in range(m):
                row["v_{}".format(i)] = None if last else dataset.v[k, t, i]
                row["u_{}".format(i)] = None if last else dataset.u[k, t, i]
            if with_noise:
                for i in range(n):
                    row["xi_{}".format(i)] = dataset.xi[k, t, i]
                for i in range(m):
                    row["eta_{}".format(i)] = None if last else dataset.eta[k, t, i]
            rows.append(row)
        reporter.add_multiple(rows)
        rows = []
    write_metadata(csvpath, dict(meta, with_noise_records=with_noise))
    logger.info("Dataset written: {} ({} trajectories)".format(csvpath, len(dataset)))
    return csvpath


def read_dataset(csvpath: Path) -> TrajectoryDataset:
    """Read a dataset written by :func:`write_dataset`, checking it against its metadata.

    :param pathlib.Path csvpath: dataset CSV

    :raises DatasetFormatError: on missing files or dimension mismatches
    """
    csvpath = Path(csvpath)
    if not csvpath.is_file():
        raise DatasetFormatError("dataset file not found: {}".format(csvpath))
    meta = read_metadata(csvpath)
    try:
        n, m, p, T, n_traj = (int(meta[k]) for k in ("n", "m", "p", "T", "n_traj"))
    except (KeyError, TypeError, ValueError) as err:
        raise DatasetFormatError("incomplete metadata for {}: {}".format(csvpath, err))
    with_noise = bool(meta.get("with_noise_records", False))
    expected = dataset_headers(n, m, p, with_noise)

    headers, rows = read_csv_rows(csvpath)
    if headers != expected:
        raise DatasetFormatError(
            "columns of {} do not match metadata dimensions (n={}, m={}, p={}): {}".format(
                csvpath, n, m, p, headers
            )
        )
    if len(rows) != n_traj * (T + 1):
        raise DatasetFormatError(
            "{} rows found, {} expected from metadata".format(len(rows), n_traj * (T + 1))
        )

    col = {name: i for i, name in enumerate(headers)}

    def _block(prefix, dim, last_empty):
        out = np.zeros((n_traj, T + 1, dim))
        for r in rows:
            k, t = int(r[col["traj"]]), int(r[col["t"]])
            if last_empty and t == T:
                continue
            for i in range(dim):
                out[k, t, i] = float(r[col["{}_{}".format(prefix, i)]])
        return out[:, :T, :] if last_empty else out

    try:
        dataset = TrajectoryDataset(
            x=_block("x", n, False),
            u=_block("u", m, True),
            y=_block("y", p, False),
            v=_block("v", m, True),
            xi=_block("xi", n, False) if with_noise else None,
            eta=_block("eta", m, True) if with_noise else None,
            meta={k: v for k, v in meta.items() if k not in ("with_noise_records",)},
        )
    except (ValueError, IndexError) as err:
        raise DatasetFormatError("malformed dataset {}: {}".format(csvpath, err))
    logger.debug("Dataset read: {}".format(dataset))
    return dataset


def _json_default(obj):
    """Make numpy values JSON serializable."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError("{} is not JSON serializable".format(type(obj)))
