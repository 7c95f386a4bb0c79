"""JSON encoding of matrices, tuples and Schur functions (schema ``rowcon/1``).

* complex scalars are ``[re, im]`` pairs of IEEE doubles (plain numbers are
  accepted on input as real scalars);
* matrices are row-major nested lists of such pairs;
* a row contraction is ``{"n": n, "d": d, "blocks": [B_1, ..., B_d]}``;
* a :class:`~rowcon.schur.Realization` stores ``A, B, C, D``; every other Schur
  function is exported as a sampled table with provenance metadata.

Documents are written with sorted keys so equal content gives equal bytes,
and files are replaced atomically.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .numlin import DEFAULT_TOL, TolerancePolicy
from .rowop import RowContraction
from .schur import Realization, SampledTable, SchurFunction, evaluate_many

__all__ = [
    "SCHEMA",
    "SchemaError",
    "complex_to_json",
    "complex_from_json",
    "matrix_to_json",
    "matrix_from_json",
    "points_to_json",
    "points_from_json",
    "tuple_to_json",
    "tuple_from_json",
    "schur_to_json",
    "schur_from_json",
    "canonical_bytes",
    "input_hash",
    "to_plain",
    "dumps",
    "atomic_write",
]

SCHEMA = "rowcon/1"


class SchemaError(ValueError):
    """A document does not match the ``rowcon/1`` layout."""


def complex_to_json(x) -> list[float]:
    x = complex(x)
    return [float(x.real), float(x.imag)]


def complex_from_json(v) -> complex:
    if isinstance(v, bool):
        raise SchemaError("booleans are not numbers")
    if isinstance(v, (int, float)):
        return complex(float(v), 0.0)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
        isinstance(c, (int, float)) and not isinstance(c, bool) for c in v
    ):
        return complex(float(v[0]), float(v[1]))
    raise SchemaError(f"expected a number or an [re, im] pair, got {v!r}")


def matrix_to_json(M) -> list:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise SchemaError(f"expected a matrix, got an array of shape {M.shape}")
    return [[complex_to_json(x) for x in row] for row in M]


def matrix_from_json(v) -> np.ndarray:
    if not isinstance(v, list) or not all(isinstance(row, list) for row in v):
        raise SchemaError("a matrix must be a list of rows")
    if not v:
        return np.zeros((0, 0), dtype=complex)
    width = len(v[0])
    if any(len(row) != width for row in v):
        raise SchemaError("matrix rows have different lengths")
    return np.array([[complex_from_json(x) for x in row] for row in v], dtype=complex).reshape(
        len(v), width
    )


def points_to_json(points) -> list:
    P = np.asarray(points, dtype=complex)
    return [[complex_to_json(x) for x in z] for z in P]


def points_from_json(v, d: int) -> np.ndarray:
    if not isinstance(v, list):
        raise SchemaError("points must be a list")
    out = []
    for z in v:
        if not isinstance(z, list) or len(z) != d:
            raise SchemaError(f"every point needs {d} coordinates")
        out.append([complex_from_json(x) for x in z])
    P = np.array(out, dtype=complex).reshape(-1, d)
    if len(P) and np.max(np.linalg.norm(P, axis=1)) >= 1.0:
        raise SchemaError("points must lie in the open unit ball")
    return P


def tuple_to_json(T: RowContraction) -> dict:
    return {"n": T.n, "d": T.d, "blocks": [matrix_to_json(B) for B in T.blocks]}


def tuple_from_json(v, tol: TolerancePolicy = DEFAULT_TOL) -> RowContraction:
    if not isinstance(v, dict) or not {"n", "d", "blocks"} <= set(v):
        raise SchemaError('a row contraction needs "n", "d" and "blocks"')
    n, d = v["n"], v["d"]
    if not (isinstance(n, int) and isinstance(d, int) and n >= 1 and d >= 1):
        raise SchemaError('"n" and "d" must be positive integers')
    if not isinstance(v["blocks"], list) or len(v["blocks"]) != d:
        raise SchemaError(f'"blocks" must hold {d} matrices')
    blocks = [matrix_from_json(B) for B in v["blocks"]]
    if any(B.shape != (n, n) for B in blocks):
        raise SchemaError(f"every block must be {n} x {n}")
    return RowContraction(np.stack(blocks), tol)


def schur_to_json(b: SchurFunction, points=None) -> dict:
    """Realizations keep their state-space data; anything else becomes a table."""
    if isinstance(b, Realization):
        return {
            "kind": "realization",
            "d": b.d,
            "A": [matrix_to_json(Ak) for Ak in b.A],
            "B": matrix_to_json(b.B),
            "C": matrix_to_json(b.C),
            "D": matrix_to_json(b.D),
        }
    if isinstance(b, SampledTable):
        P, vals, prov = b.points, b.values, b.provenance
    else:
        if points is None:
            raise SchemaError("exporting a composite function needs sample points")
        P = np.asarray(points, dtype=complex).reshape(-1, b.d)
        vals, prov = evaluate_many(b, P), {"source": b.describe()}
    return {
        "kind": "table",
        "d": b.d,
        "p": b.p,
        "q": b.q,
        "points": points_to_json(P),
        "values": [matrix_to_json(v) for v in vals],
        "provenance": prov,
    }


def schur_from_json(v) -> SchurFunction:
    if not isinstance(v, dict) or "kind" not in v:
        raise SchemaError('a Schur function needs a "kind"')
    if v["kind"] == "realization":
        try:
            A = np.stack([matrix_from_json(Ak) for Ak in v["A"]])
            return Realization(A, matrix_from_json(v["B"]), matrix_from_json(v["C"]),
                               matrix_from_json(v["D"]))
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"bad realization: {exc}") from exc
    if v["kind"] == "table":
        try:
            d = int(v["d"])
            P = points_from_json(v["points"], d)
            vals = [matrix_from_json(m) for m in v["values"]]
            if len(vals) != len(P):
                raise SchemaError("a table needs one value per point")
            V = np.stack(vals) if vals else np.zeros((0, int(v["p"]), int(v["q"])), dtype=complex)
            return SampledTable(P, V, v.get("provenance"))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad table: {exc}") from exc
    raise SchemaError(f"unknown Schur function kind {v['kind']!r}")


def canonical_bytes(doc) -> bytes:
    return json.dumps(to_plain(doc), sort_keys=True, separators=(",", ":")).encode()


def input_hash(raw: bytes) -> str:
    """SHA-256 of the raw input bytes."""
    return hashlib.sha256(raw).hexdigest()


def to_plain(obj):
    """Convert numpy scalars and containers to JSON types.

    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"`` so
    the output stays strict JSON.
    """
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if np.isfinite(x):
            return x
        return "nan" if np.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_to_json(obj)
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    return obj


def dumps(doc) -> str:
    return json.dumps(to_plain(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
