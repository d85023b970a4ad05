"""JSON wire formats.

Matrix::

    {"rows": r, "cols": c, "re": [[...]], "im": [[...]]}

Density-matrix files may also carry ``"m"`` and ``"n"`` to name the tensor
factors.  Ensemble::

    {"m": m, "n": n, "components": [{"weight": w, "e": [[re, im], ...], "f": [...]}]}

Automorphism word (applied right to left)::

    [{"g": "swap"} | {"g": "pt", "side": "A" | "B"} | {"g": "lu", "U": matrix, "V": matrix}]
"""
from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .errors import SchemaError
from .states import Dims, Ensemble, ProductVector

__all__ = [
    "matrix_to_json",
    "matrix_from_json",
    "vector_to_json",
    "vector_from_json",
    "ensemble_to_json",
    "ensemble_from_json",
    "product_vector_to_json",
    "product_vector_from_json",
    "dumps",
    "load_file",
]


def _num(x) -> float:
    x = float(x)
    return 0.0 if x == 0 else x  # drop negative zero for stable output


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=np.complex128)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "re": [[_num(x) for x in row] for row in a.real],
        "im": [[_num(x) for x in row] for row in a.imag],
    }


def _require(doc, key, where):
    if not isinstance(doc, dict):
        raise SchemaError(where, "expected an object")
    if key not in doc:
        raise SchemaError(f"{where}.{key}", "missing")
    return doc[key]


def _finite_grid(grid, rows, cols, field) -> np.ndarray:
    try:
        arr = np.asarray(grid, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(field, "must be a grid of numbers") from None
    if arr.shape != (rows, cols):
        raise SchemaError(field, f"shape {arr.shape} does not match rows x cols = {rows}x{cols}")
    if not np.all(np.isfinite(arr)):
        raise SchemaError(field, "non-finite entry")
    return arr


def matrix_from_json(doc, where: str = "matrix") -> np.ndarray:
    rows = _require(doc, "rows", where)
    cols = _require(doc, "cols", where)
    if not isinstance(rows, int) or not isinstance(cols, int) or rows < 1 or cols < 1:
        raise SchemaError(f"{where}.rows", "rows and cols must be positive integers")
    re = _finite_grid(_require(doc, "re", where), rows, cols, f"{where}.re")
    im = _finite_grid(_require(doc, "im", where), rows, cols, f"{where}.im")
    return re + 1j * im


def vector_to_json(v) -> list:
    return [[_num(z.real), _num(z.imag)] for z in np.asarray(v, dtype=np.complex128).ravel()]


def vector_from_json(items, where: str) -> np.ndarray:
    if not isinstance(items, list) or not items:
        raise SchemaError(where, "expected a non-empty list of [re, im] pairs")
    out = []
    for i, pair in enumerate(items):
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
            raise SchemaError(f"{where}[{i}]", "expected [re, im]")
        try:
            re, im = float(pair[0]), float(pair[1])
        except (TypeError, ValueError):
            raise SchemaError(f"{where}[{i}]", "entries must be numbers") from None
        if not (math.isfinite(re) and math.isfinite(im)):
            raise SchemaError(f"{where}[{i}]", "non-finite entry")
        out.append(complex(re, im))
    return np.array(out)


def product_vector_to_json(pv: ProductVector) -> dict:
    return {"e": vector_to_json(pv.e), "f": vector_to_json(pv.f)}


def product_vector_from_json(doc, dims: Dims, where: str) -> ProductVector:
    e = vector_from_json(_require(doc, "e", where), f"{where}.e")
    f = vector_from_json(_require(doc, "f", where), f"{where}.f")
    if e.size != dims.m:
        raise SchemaError(f"{where}.e", f"length {e.size} != m = {dims.m}")
    if f.size != dims.n:
        raise SchemaError(f"{where}.f", f"length {f.size} != n = {dims.n}")
    try:
        return ProductVector.from_raw(e, f)
    except ValueError as exc:
        raise SchemaError(where, str(exc)) from None


def dims_from_json(doc, where: str) -> Dims:
    m = _require(doc, "m", where)
    n = _require(doc, "n", where)
    if not isinstance(m, int) or not isinstance(n, int) or m < 1 or n < 1:
        raise SchemaError(f"{where}.m", "m and n must be positive integers")
    return Dims(m, n)


def ensemble_to_json(ens: Ensemble) -> dict:
    return {
        "m": ens.dims.m,
        "n": ens.dims.n,
        "components": [{"weight": _num(w), **product_vector_to_json(pv)} for w, pv in ens.components],
    }


def ensemble_from_json(doc, where: str = "ensemble") -> Ensemble:
    """Parse an ensemble; factors are normalised and weights must sum to one."""
    dims = dims_from_json(doc, where)
    comps = _require(doc, "components", where)
    if not isinstance(comps, list) or not comps:
        raise SchemaError(f"{where}.components", "expected a non-empty list")
    weights, pvs = [], []
    for i, c in enumerate(comps):
        here = f"{where}.components[{i}]"
        w = _require(c, "weight", here)
        if not isinstance(w, (int, float)) or not w > 0 or not math.isfinite(w):
            raise SchemaError(f"{here}.weight", "must be a positive number")
        weights.append(float(w))
        pvs.append(product_vector_from_json(c, dims, here))
    if abs(sum(weights) - 1.0) > 1e-9:
        raise SchemaError(f"{where}.components", f"weights sum to {sum(weights)!r}, expected 1")
    total = sum(weights)
    return Ensemble(dims, tuple((w / total, pv) for w, pv in zip(weights, pvs)))


def dumps(report: Any) -> str:
    """Serialise a report: insertion key order, no NaN, one line plus newline."""
    return json.dumps(report, allow_nan=False, ensure_ascii=False, separators=(",", ":")) + "\n"


def load_file(path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(str(path), f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
