"""Deterministic JSON output: fixed key order, floats with 17 significant digits."""
from __future__ import annotations

import json
import math

import numpy as np

SCHEMA = "john-forge/1"


def _fmt_float(x: float) -> str:
    x = x + 0.0  # no negative zeros
    if math.isnan(x) or math.isinf(x):
        return "null"
    s = "%.17g" % x
    if not any(c in s for c in ".eE"):
        s += ".0"
    return s


def _encode(obj, out: list):
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k)))
            out.append(": ")
            _encode(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, v in enumerate(obj.tolist() if isinstance(obj, np.ndarray) else obj):
            if i:
                out.append(", ")
            _encode(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Serialize with insertion-ordered keys; output is byte-stable across runs."""
    out: list[str] = []
    _encode(obj, out)
    return "".join(out)


def document(command: str, **fields) -> dict:
    return {"schema": SCHEMA, "command": command, **fields}


def load(path: str):
    with open(path) as fh:
        return json.load(fh)
