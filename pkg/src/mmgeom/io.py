"""Reading and writing the JSON space file format.

The document is an object with ``vertices`` (``[{"id", "w"}]``), ``edges``
(``[{"u", "v", "len"}]``), ``mesh``, ``tau`` and a free ``meta`` map.
Optional keys: ``coords`` (per-vertex coordinate lists) and
``measure_scale`` (omitted when 1).  Floats are written with ``repr``
precision so a save/load cycle reproduces every value bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .space import DiscreteSpace, SpaceError

__all__ = ["SpaceFileError", "to_document", "from_document", "save", "load", "dumps", "loads"]


class SpaceFileError(SpaceError):
    """Malformed space file."""


def to_document(space: DiscreteSpace) -> dict:
    doc = {
        "vertices": [{"id": v, "w": float(w)} for v, w in zip(space.ids, space.weights)],
        "edges": [{"u": space.ids[u], "v": space.ids[v], "len": float(ln)}
                  for (u, v), ln in zip(space.edges.tolist(), space.lengths)],
        "mesh": space.mesh,
        "tau": space.tau,
        "meta": _jsonable(space.meta),
    }
    if space.coords is not None:
        doc["coords"] = space.coords.tolist()
    if space.measure_scale != 1.0:
        doc["measure_scale"] = space.measure_scale
    return doc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _field(record, key, where, kind=None):
    if not isinstance(record, dict) or key not in record:
        raise SpaceFileError(f"{where}: missing field {key!r}")
    value = record[key]
    if kind is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise SpaceFileError(f"{where}: field {key!r} must be a number, got {value!r}")
    return value


def from_document(doc: dict) -> DiscreteSpace:
    if not isinstance(doc, dict):
        raise SpaceFileError("space file must hold a JSON object")
    verts = _field(doc, "vertices", "document")
    edges = _field(doc, "edges", "document")
    ids, weights = [], []
    for i, rec in enumerate(verts):
        ids.append(str(_field(rec, "id", f"vertices[{i}]")))
        weights.append(float(_field(rec, "w", f"vertices[{i}]", float)))
    index = {v: i for i, v in enumerate(ids)}
    pairs, lengths = [], []
    for i, rec in enumerate(edges):
        where = f"edges[{i}]"
        u, v = str(_field(rec, "u", where)), str(_field(rec, "v", where))
        ln = float(_field(rec, "len", where, float))
        for end in (u, v):
            if end not in index:
                raise SpaceFileError(f"{where}: unknown vertex {end!r}")
        if not ln > 0:
            raise SpaceFileError(f"{where} ({u!r}, {v!r}): edge length must be positive, got {ln}")
        pairs.append((index[u], index[v]))
        lengths.append(ln)
    mesh = float(_field(doc, "mesh", "document", float))
    tau = doc.get("tau")
    coords = doc.get("coords")
    try:
        return DiscreteSpace(ids, weights, np.array(pairs, dtype=np.int64).reshape(-1, 2),
                             lengths, mesh, None if tau is None else float(tau),
                             coords, doc.get("meta") or {}, float(doc.get("measure_scale", 1.0)))
    except SpaceFileError:
        raise
    except SpaceError as exc:
        raise SpaceFileError(str(exc)) from None


def dumps(space: DiscreteSpace) -> str:
    return json.dumps(to_document(space))


def loads(text: str) -> DiscreteSpace:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpaceFileError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return from_document(doc)


def save(space: DiscreteSpace, path) -> None:
    Path(path).write_text(dumps(space))


def load(path) -> DiscreteSpace:
    return loads(Path(path).read_text())
