import json

import numpy as np
import pytest

from ekmanqg.io import read_snapshot, write_json, write_snapshot


@pytest.mark.parametrize("shape", [(4, 3), (4, 3, 2)])
def test_round_trip(tmp_path, shape):
    f = np.random.default_rng(0).standard_normal(shape)
    p = tmp_path / "f.bin"
    write_snapshot(p, f, [0.1] * len(shape), "rho", 0.25)
    g, h = read_snapshot(p)
    assert np.array_equal(f, g)
    assert h == {"dims": list(shape), "field": "rho", "spacing": [0.1] * len(shape), "time": 0.25}


def test_x1_fastest(tmp_path):
    f = np.arange(24.0).reshape(2, 3, 4)
    p = tmp_path / "f.bin"
    write_snapshot(p, f, (1, 1, 1), "u", 0)
    raw = p.read_bytes()
    body = raw[raw.index(b"\n") + 1:]
    vals = np.frombuffer(body, "<f8")
    assert vals[:3].tolist() == [f[0, 0, 0], f[1, 0, 0], f[0, 1, 0]]
    assert len(body) == 24 * 8


def test_header_is_one_sorted_line(tmp_path):
    p = tmp_path / "f.bin"
    write_snapshot(p, np.zeros((2, 2)), (1, 1), "Q", 1.5)
    line = p.read_bytes().split(b"\n")[0].decode()
    assert list(json.loads(line)) == ["dims", "field", "spacing", "time"]


def test_errors(tmp_path):
    with pytest.raises(ValueError):
        write_snapshot(tmp_path / "a", np.zeros((2, 2)), (1,), "x", 0)
    p = tmp_path / "b"
    write_snapshot(p, np.zeros((2, 2)), (1, 1), "x", 0)
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(ValueError):
        read_snapshot(p)


def test_json_deterministic(tmp_path):
    write_json(tmp_path / "a.json", {"b": 1, "a": [1.0, 2.0]})
    write_json(tmp_path / "b.json", {"a": [1.0, 2.0], "b": 1})
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
