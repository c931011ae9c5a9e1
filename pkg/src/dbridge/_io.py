"""Deterministic text serialization shared by the exporters."""
from __future__ import annotations

import json
import math
from decimal import Decimal


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def dump_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"cannot encode non-finite float {obj!r} as JSON")
        return fmt_float(obj)
    if isinstance(obj, Decimal):
        return format(obj, "f")
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dump_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dump_json(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dump_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):
        return dump_json(obj.item(), indent, _level)
    raise TypeError(f"cannot encode {type(obj).__name__}")
