"""Deterministic JSON/CSV number formatting (17 significant digits, LF)."""

from __future__ import annotations

import json
import math

__all__ = ["fmt_num", "dumps_canonical"]


def fmt_num(x) -> str:
    """Render a number with 17 significant digits.

    Integers stay integers; floats use scientific notation so that output is
    byte-stable across platforms and round-trips exactly.  Non-finite values
    render as nan/inf (CSV context; JSON emits null instead).
    """
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if not math.isfinite(x):
        return str(x)
    return format(x, ".16e")


def dumps_canonical(obj, indent: int | None = None) -> str:
    """JSON with insertion-ordered keys and fmt_num for every number."""
    out: list[str] = []
    _emit(obj, out, indent, 0)
    return "".join(out)


def _emit(obj, out, indent, level):
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end_pad = "" if indent is None else "\n" + " " * (indent * level)
    if obj is None:
        out.append("null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, bool) or isinstance(obj, (int, float)):
        if isinstance(obj, float) and not math.isfinite(obj):
            out.append("null")
        else:
            out.append(fmt_num(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append("," if indent is None else ",")
            out.append(pad)
            out.append(json.dumps(str(k)))
            out.append(": ")
            _emit(v, out, indent, level + 1)
        out.append(end_pad)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            out.append(pad)
            _emit(v, out, indent, level + 1)
        out.append(end_pad)
        out.append("]")
    else:
        raise TypeError(f"not JSON serializable: {obj!r}")
