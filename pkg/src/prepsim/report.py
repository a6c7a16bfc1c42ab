"""Machine-readable report rendering.

Floats are written with 17 significant digits, which round-trips every
double exactly, so identical runs produce byte-identical text.
"""

from __future__ import annotations

import json
import math

import numpy as np

FORMATS = ("json", "table")


def format_number(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _plain(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, tuple):
        return list(obj)
    return obj


def dumps_json(obj, indent: int = 2, _level: int = 0) -> str:
    obj = _plain(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(_plain(v), (dict, list)) for v in obj):
            return "[" + ", ".join(dumps_json(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_number(obj)
    return json.dumps(str(obj))


def _flatten(obj, prefix=""):
    obj = _plain(obj)
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list) and any(isinstance(_plain(v), (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        if isinstance(obj, list):
            text = " ".join(_scalar(v) for v in obj)
        else:
            text = _scalar(obj)
        yield prefix[:-1], text


def _scalar(v) -> str:
    v = _plain(v)
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        return format_number(v).strip('"')
    return str(v)


def dumps_table(obj) -> str:
    """Tab-delimited ``key<TAB>value`` rows with dotted key paths."""
    rows = ["key\tvalue"] + [f"{k}\t{v}" for k, v in _flatten(obj)]
    return "\n".join(rows)


def render(obj, fmt: str = "json") -> str:
    if fmt == "json":
        return dumps_json(obj)
    if fmt == "table":
        return dumps_table(obj)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
