"""Serialization: grid functions as JSON (bit-exact for finite values,
"+inf"/"-inf" sentinels) and CSV (9 significant digits, plot-oriented);
operator graphs and result reports as JSON.  Files are written atomically
(temp file + rename)."""

from __future__ import annotations

import json
import math
import os
import tempfile
from typing import Any

import numpy as np

from .errors import ParameterError
from .grids import Grid, GridFn
from .monotone import OperatorGraph

__all__ = [
    "write_gridfn_json",
    "read_gridfn_json",
    "write_gridfn_csv",
    "write_graph_json",
    "read_graph_json",
    "write_json_report",
]

SCHEMA_VERSION = 1


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _encode_value(v: float):
    if v == math.inf:
        return "+inf"
    if v == -math.inf:
        return "-inf"
    return float(v)


def _decode_value(v) -> float:
    if v == "+inf":
        return math.inf
    if v == "-inf":
        return -math.inf
    return float(v)


def write_gridfn_json(f: GridFn, path: str) -> None:
    doc = {
        "schema": SCHEMA_VERSION,
        "dim": f.grid.dim,
        "axes": [{"lo": lo, "hi": hi, "n": n} for lo, hi, n in f.grid.axes],
        "values": [_encode_value(v) for v in f.values.ravel()],
    }
    _atomic_write(path, json.dumps(doc, sort_keys=True))


def read_gridfn_json(path: str) -> GridFn:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema") != SCHEMA_VERSION:
        raise ParameterError(f"unsupported schema {doc.get('schema')!r}")
    grid = Grid(tuple((ax["lo"], ax["hi"], ax["n"]) for ax in doc["axes"]))
    vals = np.asarray([_decode_value(v) for v in doc["values"]]).reshape(grid.shape)
    return GridFn(grid, vals)


def _fmt9(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return format(v, ".9g")


def write_gridfn_csv(f: GridFn, path: str) -> None:
    lines = []
    if f.grid.dim == 1:
        lines.append("x,value")
        for x, v in zip(f.grid.coords(0), f.values):
            lines.append(f"{_fmt9(x)},{_fmt9(v)}")
    else:
        lines.append("x,y,value")
        xs, ys = f.grid.coords(0), f.grid.coords(1)
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                lines.append(f"{_fmt9(x)},{_fmt9(y)},{_fmt9(f.values[i, j])}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_graph_json(G: OperatorGraph, path: str) -> None:
    doc = {
        "schema": SCHEMA_VERSION,
        "dim": G.dim,
        "pairs": [[list(map(float, x)), list(map(float, s))] for x, s in zip(G.xs, G.xstars)],
    }
    _atomic_write(path, json.dumps(doc, sort_keys=True))


def read_graph_json(path: str) -> OperatorGraph:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema") != SCHEMA_VERSION:
        raise ParameterError(f"unsupported schema {doc.get('schema')!r}")
    xs = np.asarray([p[0] for p in doc["pairs"]], dtype=float)
    xst = np.asarray([p[1] for p in doc["pairs"]], dtype=float)
    return OperatorGraph(xs, xst)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return _encode_value(float(obj))
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def write_json_report(doc: dict, path: str) -> None:
    out = {"schema": SCHEMA_VERSION}
    out.update(_jsonable(doc))
    _atomic_write(path, json.dumps(out, sort_keys=True))
