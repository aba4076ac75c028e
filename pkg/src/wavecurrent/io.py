"""File formats: binary grid fields, CSV tables, checkpoints.

Binary grid file (little endian)::

    int64 dims
    int64 N_1 [, N_2]
    float64 L_1 [, L_2]
    float64 values[...]          row-major, one or more fields back to back

Checkpoint file::

    8 bytes  magic b"WCCHKPT1"
    float64  t
    float64  dt
    32 bytes scenario hash (sha256 digest)
    grid file holding eta then phi
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
from pathlib import Path

import numpy as np

from .grid import Field, SpectralGrid
from .solver import WaveState

CHECKPOINT_MAGIC = b"WCCHKPT1"


def _header_bytes(grid: SpectralGrid) -> bytes:
    return (np.array([grid.dims, *grid.counts], dtype="<i8").tobytes()
            + np.array(grid.lengths, dtype="<f8").tobytes())


def _write_grid(fh, grid: SpectralGrid, fields) -> None:
    fh.write(_header_bytes(grid))
    for f in fields:
        f = np.asarray(f)
        if np.iscomplexobj(f):
            raise ValueError("binary grid files hold real fields; write real and imaginary parts separately")
        if f.shape[-grid.dims:] != grid.shape:
            raise ValueError(f"field shape {f.shape} does not end with grid shape {grid.shape}")
        fh.write(np.ascontiguousarray(f, dtype="<f8").tobytes())


def _read_grid(buf: bytes, offset: int = 0):
    dims = int(np.frombuffer(buf, "<i8", 1, offset)[0])
    if dims not in (1, 2):
        raise ValueError(f"bad grid header: dims={dims}")
    offset += 8
    counts = tuple(int(n) for n in np.frombuffer(buf, "<i8", dims, offset))
    offset += 8 * dims
    lengths = tuple(float(v) for v in np.frombuffer(buf, "<f8", dims, offset))
    offset += 8 * dims
    grid = SpectralGrid(lengths, counts)
    data = np.frombuffer(buf, "<f8", offset=offset)
    if data.size % grid.size:
        raise ValueError("grid file payload is not a whole number of fields")
    return grid, data.reshape((-1, *grid.shape)).copy()


def write_grid_file(path, grid: SpectralGrid, *fields) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        _write_grid(fh, grid, fields)
    return path


def read_grid_file(path):
    """(grid, values) where values has shape (n_fields, *grid.shape)."""
    return _read_grid(Path(path).read_bytes())


def write_field(path, field: Field) -> Path:
    vals = field.values if field.components > 1 else field.values[None]
    return write_grid_file(path, field.grid, *vals)


def read_field(path) -> Field:
    grid, data = read_grid_file(path)
    if data.shape[0] == 1:
        return Field(grid, data[0])
    return Field(grid, data, components=data.shape[0])


def write_table_file(path, x: np.ndarray, y: np.ndarray, table: np.ndarray, meta: dict | None = None) -> Path:
    """A non-periodic 2D table (e.g. a Wigner frame) in the grid format plus a JSON sidecar with axis origins."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if table.shape != (len(x), len(y)):
        raise ValueError("table shape does not match its axes")
    # the header carries counts and spans; the sidecar carries the origins
    dx, dy = x[1] - x[0], y[1] - y[0]
    header = (np.array([2, len(x), len(y)], dtype="<i8").tobytes()
              + np.array([dx * len(x), dy * len(y)], dtype="<f8").tobytes())
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(header + np.ascontiguousarray(table, dtype="<f8").tobytes())
    side = {"x0": float(x[0]), "dx": float(dx), "y0": float(y[0]), "dy": float(dy), **(meta or {})}
    path.with_suffix(".json").write_text(json.dumps(side, indent=2, sort_keys=True))
    return path


def write_csv(path, rows, columns=None) -> Path:
    rows = list(rows)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if columns is None:
        columns = list(rows[0]) if rows else []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])
    return path


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [[float(v) for v in row] for row in r]
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return {h: arr[:, i] for i, h in enumerate(header)}


def write_field_slice_csv(path, grid: SpectralGrid, **fields) -> Path:
    """1D fields as columns x, name1, name2, ..."""
    if grid.dims != 1:
        raise ValueError("CSV slices are for 1D fields")
    x = grid.coords()
    rows = [dict(x=x[i], **{k: v[i] for k, v in fields.items()}) for i in range(len(x))]
    return write_csv(path, rows, ["x", *fields])


def scenario_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def write_checkpoint(path, grid: SpectralGrid, state: WaveState, dt: float, scenario_digest: str) -> Path:
    digest = bytes.fromhex(scenario_digest)
    if len(digest) != 32:
        raise ValueError("scenario hash must be a sha256 hex digest")
    buf = _io.BytesIO()
    buf.write(CHECKPOINT_MAGIC)
    buf.write(np.array([state.t, dt], dtype="<f8").tobytes())
    buf.write(digest)
    _write_grid(buf, grid, [state.eta, state.phi])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(buf.getvalue())
    return path


def read_checkpoint(path):
    """(grid, state, dt, scenario_hash)."""
    raw = Path(path).read_bytes()
    if raw[:8] != CHECKPOINT_MAGIC:
        raise ValueError("not a checkpoint file")
    t, dt = np.frombuffer(raw, "<f8", 2, 8)
    digest = raw[24:56].hex()
    grid, data = _read_grid(raw, 56)
    if data.shape[0] != 2:
        raise ValueError("checkpoint must hold eta and phi")
    return grid, WaveState(data[0], data[1], float(t)), float(dt), digest
