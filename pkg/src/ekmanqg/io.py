"""Binary field snapshots and small CSV/JSON helpers.

A snapshot is one UTF-8 JSON header line followed by raw little-endian
float64 values with x1 varying fastest, then x2, then x3.
"""
import json

import numpy as np


def write_snapshot(path, field, spacing, name, time):
    """Write ``field`` indexed ``[i1, i2, i3]`` (or ``[i1, i2]``)."""
    field = np.asarray(field, dtype=float)
    header = {"dims": list(field.shape), "spacing": [float(s) for s in spacing],
              "field": str(name), "time": float(time)}
    if len(header["spacing"]) != field.ndim:
        raise ValueError("one spacing per dimension")
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
        # reversing the axes makes x1 the contiguous one
        fh.write(np.ascontiguousarray(field.transpose()).astype("<f8").tobytes())


def read_snapshot(path):
    """Return ``(field, header)`` with the field indexed ``[i1, i2, i3]``."""
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        data = np.frombuffer(fh.read(), dtype="<f8")
    dims = header["dims"]
    if data.size != int(np.prod(dims)):
        raise ValueError(f"{path}: expected {int(np.prod(dims))} values, found {data.size}")
    return data.reshape(dims[::-1]).transpose().astype(float), header


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
