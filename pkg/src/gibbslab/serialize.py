"""JSON schema for Hamiltonians, eigensystems and states, plus deterministic CSV writing.

Real numbers are stored as decimal strings with 17 significant digits so a
round trip reproduces every bit. Complex arrays are stored as ``[re, im]``
string pairs. Every document carries ``"schema": "gibbslab/1"`` and a
``"kind"`` tag.
"""
from __future__ import annotations

import csv
import json
import math

import numpy as np

from .hamiltonians import Eigensystem, SystemHamiltonian
from .states import DensityMatrix, PureState

SCHEMA = "gibbslab/1"


def fmt(x) -> str:
    return format(float(x), ".17g")


def _real(arr):
    return [fmt(v) for v in np.asarray(arr, dtype=np.float64).ravel()]


def _complex(arr):
    arr = np.asarray(arr, dtype=np.complex128)
    return {"shape": list(arr.shape), "data": [[fmt(v.real), fmt(v.imag)] for v in arr.ravel()]}


def _parse_real(items):
    return np.array([float(v) for v in items], dtype=np.float64)


def _parse_complex(doc):
    data = np.array([complex(float(a), float(b)) for a, b in doc["data"]], dtype=np.complex128)
    return data.reshape(doc["shape"])


def to_dict(obj) -> dict:
    if isinstance(obj, SystemHamiltonian):
        out = {"kind": "system-hamiltonian", "energies": _real(obj.energies)}
        if obj.basis is not None:
            out["basis"] = _complex(obj.basis)
    elif isinstance(obj, Eigensystem):
        out = {"kind": "eigensystem", "eigenvalues": _real(obj.eigenvalues), "offset": fmt(obj.offset),
               "dims": list(obj.dims) if obj.dims else None}
        if obj.permutation is not None:
            out["permutation"] = [int(i) for i in obj.permutation]
        else:
            out["eigenvectors"] = _complex(obj.eigenvectors)
    elif isinstance(obj, DensityMatrix):
        out = {"kind": "density-matrix", "matrix": _complex(obj.matrix),
               "dims": list(obj.dims) if obj.dims else None}
    elif isinstance(obj, PureState):
        out = {"kind": "pure-state", "amplitudes": _complex(obj.amplitudes),
               "dims": list(obj.dims) if obj.dims else None}
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    return {"schema": SCHEMA, **out}


def from_dict(doc: dict):
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"unsupported schema {doc.get('schema')!r}")
    kind = doc.get("kind")
    dims = tuple(doc["dims"]) if doc.get("dims") else None
    if kind == "system-hamiltonian":
        basis = _parse_complex(doc["basis"]) if "basis" in doc else None
        return SystemHamiltonian(_parse_real(doc["energies"]), basis)
    if kind == "eigensystem":
        vals = _parse_real(doc["eigenvalues"])
        if "permutation" in doc:
            return Eigensystem(vals, permutation=np.array(doc["permutation"], dtype=np.intp),
                               offset=float(doc["offset"]), dims=dims)
        return Eigensystem(vals, eigenvectors=_parse_complex(doc["eigenvectors"]), offset=float(doc["offset"]),
                           dims=dims)
    if kind == "density-matrix":
        return DensityMatrix(_parse_complex(doc["matrix"]), dims=dims)
    if kind == "pure-state":
        return PureState(_parse_complex(doc["amplitudes"]), dims=dims)
    raise ValueError(f"unknown kind {kind!r}")


def dumps(obj) -> str:
    return json.dumps(to_dict(obj), sort_keys=True)


def loads(text: str):
    return from_dict(json.loads(text))


def cell(v) -> str:
    """CSV cell text: shortest round-trip floats, lowercase booleans."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, columns, rows) -> None:
    """RFC-4180 CSV (CRLF, minimal quoting) with exactly ``columns`` as header."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, dialect="excel")
        writer.writerow(columns)
        for row in rows:
            missing = set(columns) - set(row)
            if missing:
                raise KeyError(f"row lacks columns {sorted(missing)}")
            writer.writerow([cell(row[c]) for c in columns])


def read_csv(path):
    """Header and rows (as dicts of strings)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return list(reader.fieldnames or []), list(reader)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else cell(v)
    return v


def write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
