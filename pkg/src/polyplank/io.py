"""JSON encoding helpers shared by reports and the CLI.

Complex vectors are lists of ``[re, im]`` pairs, real vectors plain lists.
Floats go through :func:`repr`, which is the shortest string that round-trips
a double.  Non-finite values are written as ``null``.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .errors import PlankError

SCHEMA_VERSION = 1


def encode_vector(v) -> list:
    v = np.asarray(v)
    if np.iscomplexobj(v):
        return [[float(x.real), float(x.imag)] for x in v]
    return [float(x) for x in v]


def decode_vector(data, where: str = "vector") -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise PlankError(f"{where}: expected a non-empty list")
    if all(isinstance(x, (list, tuple)) for x in data):
        try:
            return np.array([complex(float(a), float(b)) for a, b in data])
        except (TypeError, ValueError) as exc:
            raise PlankError(f"{where}: entries must be [re, im] pairs") from exc
    try:
        return np.array([float(x) for x in data])
    except (TypeError, ValueError) as exc:
        raise PlankError(f"{where}: entries must be numbers or [re, im] pairs") from exc


def jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(encode_vector(obj) if obj.ndim == 1 else obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(obj.real), jsonable(obj.imag)]
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False)
