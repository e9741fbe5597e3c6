"""JSON-ready encoding of verifier records and the report envelope."""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .space import Region, ShadowParams

__all__ = ["VERSION", "encode", "envelope", "format_table"]

VERSION = "0.1.0"


def _num(v):
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return v


def encode(obj, space=None):
    """Recursively convert records to plain JSON types.

    Regions list their member ids when ``space`` is given, so witnesses can be
    reproduced from the report alone.
    """
    if isinstance(obj, Region):
        members = obj.members.tolist()
        out = {"kind": obj.kind, "measure": _num(obj.measure), "size": len(members)}
        if obj.center is not None:
            out["center"] = space.ids[obj.center] if space is not None else obj.center
        out.update(r1=_num(obj.r1), r2=_num(obj.r2))
        out["members"] = [space.ids[i] for i in members] if space is not None else members
        if obj.note:
            out["note"] = obj.note
        return out
    if isinstance(obj, ShadowParams):
        return {k: _num(v) for k, v in dataclasses.asdict(obj).items() if v is not None}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {}
        for f in dataclasses.fields(obj):
            out[f.name] = encode(getattr(obj, f.name), space)
        for extra in ("passed", "tag", "infinite", "violated", "is_local_cut"):
            if hasattr(type(obj), extra) and isinstance(getattr(type(obj), extra), property):
                out[extra] = encode(getattr(obj, extra), space)
        return out
    if isinstance(obj, dict):
        return {str(encode(k, space)): encode(v, space) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v, space) for v in obj]
    if isinstance(obj, np.ndarray):
        return [encode(v, space) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def envelope(config: dict, records: list, summary: dict, slacks: dict | None = None) -> dict:
    return {
        "tool": "mmgeom",
        "version": VERSION,
        "config": config,
        "records": records,
        "summary": summary,
        "slacks": slacks or {},
    }


def format_table(env: dict) -> str:
    """Plain-text table: one line per record with its scalar fields."""
    lines = [f"# {env['config'].get('command', '')}  status={env['summary'].get('status')}"]
    for rec in env["records"]:
        cells = [f"{k}={v}" for k, v in rec.items() if isinstance(v, (int, float, str, bool))]
        lines.append("  ".join(cells))
    for k, v in env["summary"].items():
        lines.append(f"summary.{k}={v}")
    return "\n".join(lines) + "\n"
