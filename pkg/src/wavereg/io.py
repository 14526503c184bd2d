"""Artifact writers and readers: CSV tables, flat binary grids, JSON reports."""
from __future__ import annotations

import csv
import json
import math
import struct
from pathlib import Path

import numpy as np

from .errors import DimensionError, ParameterError
from .manifold import GridFunction, ManifoldModel

SCHEMA = 1
MAGIC = b"WRGF"
HEADER = struct.Struct("<4sI3Q")   # 32 bytes: magic, dims, n_1..n_3 (unused = 0)


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, columns, rows) -> Path:
    """UTF-8, comma separated; header cells are ``name (unit)``.

    ``columns`` is a sequence of ``(name, unit)`` pairs; ``rows`` an iterable
    of sequences of the same length.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = [f"{name} ({unit})" for name, unit in columns]
    with path.open("w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            row = list(row)
            if len(row) != len(columns):
                raise DimensionError(f"row of length {len(row)} under {len(columns)} columns")
            wr.writerow([_cell(v) for v in row])
    return path


def read_csv(path):
    """``(header, rows)`` with numeric cells converted to float where possible."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        rows = []
        for r in rd:
            out = []
            for v in r:
                try:
                    out.append(float(v))
                except ValueError:
                    out.append(v if v else None)
            rows.append(out)
    return header, rows


def grid_function_csv(path, u: GridFunction) -> Path:
    """Coordinates and value (real part, plus imaginary part for complex data)."""
    coords = np.meshgrid(*u.coords(), indexing="ij")
    cols = [(f"x{i + 1}", "length") for i in range(u.manifold.dim)]
    complex_data = np.iscomplexobj(u.values) and not u.real
    cols.append(("value_re" if complex_data else "value", "1"))
    data = [c.ravel() for c in coords] + [u.real_values().ravel()]
    if complex_data:
        cols.append(("value_im", "1"))
        data.append(u.values.imag.ravel())
    return write_csv(path, cols, zip(*data))


def write_binary(path, u: GridFunction) -> Path:
    """Little-endian float64 samples (real part), row-major, after a 32-byte header."""
    vals = np.ascontiguousarray(u.real_values(), dtype="<f8")
    dims = vals.ndim
    if dims > 3:
        raise DimensionError("binary grids hold at most 3 dimensions")
    shape = list(vals.shape) + [0] * (3 - dims)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(HEADER.pack(MAGIC, dims, *shape))
        fh.write(vals.tobytes(order="C"))
    return path


def read_binary(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise ParameterError("file shorter than the binary header")
    magic, dims, *shape = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ParameterError("not a wavereg grid file")
    shape = tuple(shape[:dims])
    count = int(np.prod(shape))
    body = np.frombuffer(raw, dtype="<f8", offset=HEADER.size)
    if body.size != count:
        raise ParameterError(f"expected {count} samples, found {body.size}")
    return body.reshape(shape).astype(float)


def grid_function_from_binary(path, M: ManifoldModel) -> GridFunction:
    vals = read_binary(path)
    if vals.ndim != M.dim:
        raise DimensionError("binary grid rank does not match the manifold")
    return GridFunction(M, vals, real=True)


def scan_csv(path, scans) -> Path:
    """One row per eps: eps and every seminorm of the scans (shared grid)."""
    cols = [("eps", "1")] + [(sc.seminorm, "seminorm") for sc in scans]
    rows = zip(scans[0].eps, *(sc.values for sc in scans))
    return write_csv(path, cols, rows)


def multiplier_csv(path, table) -> Path:
    return write_csv(path, [("lambda", "1/length"), ("m_eps", "1")],
                     zip(table.lam, table.values))


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _finite(obj):
    if isinstance(obj, dict):
        return {str(k): _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(float(obj)):
        return str(float(obj))
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, fixed indentation, non-finite floats as strings."""
    return json.dumps(_finite(obj), sort_keys=True, indent=2, default=_json_default,
                      allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
