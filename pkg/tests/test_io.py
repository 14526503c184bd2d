import math

import numpy as np
import pytest

from wavereg import DimensionError, GridFunction, ManifoldModel, ParameterError
from wavereg.io import (HEADER, dumps, grid_function_csv, grid_function_from_binary, read_binary,
                        read_csv, read_json, write_binary, write_csv, write_json)


def test_header_is_32_bytes():
    assert HEADER.size == 32


def test_csv_round_trip(tmp_path):
    p = write_csv(tmp_path / "sub" / "t.csv", [("eps", "1"), ("radius", "length")],
                  [(0.5, 1.25), (0.1, None)])
    header, rows = read_csv(p)
    assert header == ["eps (1)", "radius (length)"]
    assert rows == [[0.5, 1.25], [0.1, None]]
    with pytest.raises(DimensionError):
        write_csv(tmp_path / "bad.csv", [("a", "1")], [(1, 2)])


def test_csv_keeps_full_precision(tmp_path):
    v = 1 / 3
    _, rows = read_csv(write_csv(tmp_path / "p.csv", [("v", "1")], [(v,)]))
    assert rows[0][0] == v


def test_grid_function_csv(tmp_path):
    M = ManifoldModel.circle(3, 8)
    u = GridFunction(M, np.arange(8) + 1j, real=False)
    header, rows = read_csv(grid_function_csv(tmp_path / "u.csv", u))
    assert header == ["x1 (length)", "value_re (1)", "value_im (1)"]
    assert len(rows) == 8 and rows[3][0] == pytest.approx(3 * 2 * math.pi / 8)
    assert rows[3][1:] == [3.0, 1.0]


@pytest.mark.parametrize("shape", [(16,), (4, 6), (3, 4, 5)])
def test_binary_round_trip(tmp_path, shape):
    vals = np.random.default_rng(0).standard_normal(shape)
    L = tuple(2 * math.pi for _ in shape)
    M = ManifoldModel.circle(7, shape[0]) if len(shape) == 1 else ManifoldModel.torus(L, 1, shape)
    p = write_binary(tmp_path / "g.bin", GridFunction(M, vals, real=True))
    assert p.stat().st_size == 32 + 8 * vals.size
    assert np.array_equal(read_binary(p), vals)
    assert np.array_equal(grid_function_from_binary(p, M).values, vals)


def test_binary_rejects_foreign_files(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"NOPE" + bytes(28))
    with pytest.raises(ParameterError):
        read_binary(p)
    p.write_bytes(b"abc")
    with pytest.raises(ParameterError):
        read_binary(p)


def test_json_is_deterministic(tmp_path):
    obj = {"b": np.float64(1.5), "a": [np.int64(3), float("inf"), float("nan")],
           "arr": np.arange(3)}
    text = dumps(obj)
    assert text == dumps(dict(reversed(list(obj.items()))))
    assert text.index('"a"') < text.index('"b"')
    back = read_json(write_json(tmp_path / "r.json", obj))
    assert back == {"a": [3, "inf", "nan"], "arr": [0, 1, 2], "b": 1.5}
    with pytest.raises(TypeError):
        dumps({"x": object()})
