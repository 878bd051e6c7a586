"""JSON documents for operators and matrices.

Operator document::

    {"space": {"kind": "hardy"}, "terms": [{"g": [[re, im], ...], "h": [[re, im], ...]}]}

Coefficient index 0 is the constant term; for ``kind: "finite"`` the symbols
are vectors of length at most ``dim``.

Matrix document::

    {"rows": n, "cols": n, "data": [[re, im], ...]}   # row-major
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import DocumentError
from .rkhs import FiniteRankOperator, SpaceSpec

__all__ = [
    "complex_list", "parse_complex_list", "operator_from_document", "operator_to_document",
    "matrix_from_document", "matrix_to_document", "load_operator", "load_matrix",
]


def complex_list(values) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex).ravel()]


def parse_complex_list(items, what: str = "coefficients") -> np.ndarray:
    if not isinstance(items, list):
        raise DocumentError(f"{what} must be a list of [re, im] pairs")
    out = np.empty(len(items), dtype=complex)
    for i, pair in enumerate(items):
        if (not isinstance(pair, (list, tuple)) or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)):
            raise DocumentError(f"{what}[{i}] must be a [re, im] pair of numbers")
        if not all(math.isfinite(x) for x in pair):
            raise DocumentError(f"{what}[{i}] is not finite")
        out[i] = complex(pair[0], pair[1])
    return out


def _require_object(doc, what):
    if not isinstance(doc, dict):
        raise DocumentError(f"{what} must be a JSON object")


def operator_from_document(doc, space_override: str | None = None) -> FiniteRankOperator:
    """Build an operator; ``space_override`` replaces the document's space kind."""
    _require_object(doc, "operator document")
    space_doc = doc.get("space")
    _require_object(space_doc, "space")
    kind = space_override or space_doc.get("kind")
    dim = space_doc.get("dim") if kind == "finite" else None
    try:
        space = SpaceSpec(kind, dim)
    except (ValueError, TypeError) as exc:
        raise DocumentError(f"bad space: {exc}") from exc
    terms = doc.get("terms")
    if not isinstance(terms, list) or not terms:
        raise DocumentError("terms must be a non-empty list")
    pairs = []
    for i, term in enumerate(terms):
        _require_object(term, f"terms[{i}]")
        if "g" not in term or "h" not in term:
            raise DocumentError(f"terms[{i}] needs both g and h")
        pairs.append((parse_complex_list(term["g"], f"terms[{i}].g"),
                      parse_complex_list(term["h"], f"terms[{i}].h")))
    try:
        return FiniteRankOperator(space, tuple(pairs))
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


def operator_to_document(op: FiniteRankOperator) -> dict:
    space = {"kind": op.space.kind}
    if op.space.dim is not None:
        space["dim"] = op.space.dim
    return {"space": space,
            "terms": [{"g": complex_list(g.coeffs), "h": complex_list(h.coeffs)} for g, h in op.terms]}


def matrix_from_document(doc) -> np.ndarray:
    _require_object(doc, "matrix document")
    rows, cols = doc.get("rows"), doc.get("cols")
    for name, v in (("rows", rows), ("cols", cols)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise DocumentError(f"{name} must be a positive integer")
    data = parse_complex_list(doc.get("data"), "data")
    if data.size != rows * cols:
        raise DocumentError(f"data has {data.size} entries, expected {rows * cols}")
    return data.reshape(rows, cols)


def matrix_to_document(a) -> dict:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    return {"rows": int(a.shape[0]), "cols": int(a.shape[1]), "data": complex_list(a)}


def _load_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path} is not valid JSON: {exc}") from exc


def load_operator(path, space_override: str | None = None) -> FiniteRankOperator:
    return operator_from_document(_load_json(path), space_override)


def load_matrix(path) -> np.ndarray:
    return matrix_from_document(_load_json(path))
