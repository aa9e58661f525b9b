"""JSON file formats. Complex numbers are stored as ``[re, im]`` pairs."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile

import numpy as np

from .channels import MeasurementBasis
from .errors import DimensionError, ParseError
from .groups import AbelianGroup, IrrepBlock, IrrepDecomposition, Representation, TableGroup


def matrix_to_json(A) -> list:
    A = np.asarray(A, dtype=complex)
    return np.stack([A.real, A.imag], axis=-1).tolist()


def matrix_from_json(data) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"not a numeric array: {exc}") from exc
    if arr.ndim == 0 or arr.shape[-1] != 2:
        raise ParseError("complex arrays are stored as nested lists of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


# -- representations ------------------------------------------------------------

def rep_to_json(rep: Representation) -> dict:
    g = rep.group
    group = ({"kind": "abelian", "orders": list(g.orders)} if isinstance(g, AbelianGroup)
             else {"kind": "table", "table": np.asarray(g.table).tolist()})
    out = {"group": group, "matrices": matrix_to_json(rep.matrices)}
    if rep.cocycle is not None:
        out["cocycle"] = matrix_to_json(rep.cocycle)
    return out


def rep_from_json(d: dict) -> Representation:
    try:
        g = d["group"]
        group = AbelianGroup(g["orders"]) if g["kind"] == "abelian" else TableGroup(g["table"])
        mats = matrix_from_json(d["matrices"])
        cocycle = matrix_from_json(d["cocycle"]) if "cocycle" in d else None
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed representation: {exc!r}") from exc
    if mats.ndim != 3:
        raise DimensionError("representation matrices must be a list of square matrices")
    return Representation(group, mats, cocycle)


def dec_to_json(dec: IrrepDecomposition) -> dict:
    return {
        "W": matrix_to_json(dec.W),
        "blocks": [{"label": _label_out(b.label), "dim": b.dim, "multiplicity": b.multiplicity,
                    "matrices": matrix_to_json(b.matrices)} for b in dec.blocks],
    }


def dec_from_json(d: dict) -> IrrepDecomposition:
    try:
        blocks = [IrrepBlock(_label_in(b["label"]), int(b["dim"]), int(b["multiplicity"]),
                             matrix_from_json(b["matrices"])) for b in d["blocks"]]
        return IrrepDecomposition(blocks, matrix_from_json(d["W"]))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed decomposition: {exc!r}") from exc


def _label_out(label):
    return list(label) if isinstance(label, tuple) else label


def _label_in(label):
    return tuple(label) if isinstance(label, list) else label


# -- states and bases ------------------------------------------------------------

def state_to_json(state, dims) -> dict:
    state = np.asarray(state, dtype=complex)
    key = "vector" if state.ndim == 1 else "matrix"
    return {"dims": [int(x) for x in dims], key: matrix_to_json(state)}


def state_from_json(d: dict) -> tuple[np.ndarray, tuple]:
    try:
        dims = tuple(int(x) for x in d["dims"])
        state = matrix_from_json(d["vector"] if "vector" in d else d["matrix"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed state: {exc!r}") from exc
    n = int(np.prod(dims))
    if state.shape not in ((n,), (n, n)):
        raise DimensionError(f"state of shape {state.shape} does not match dims {dims}")
    return state, dims


def basis_to_json(basis: MeasurementBasis) -> dict:
    return {"vectors": matrix_to_json(basis.vectors.T)}  # one row per basis vector


def basis_from_json(d: dict) -> MeasurementBasis:
    try:
        return MeasurementBasis.from_rows(matrix_from_json(d["vectors"]))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed basis: {exc!r}") from exc


# -- files -------------------------------------------------------------------------

def load_json(path) -> tuple[dict, str]:
    """Parsed content and sha256 of the raw bytes."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
        return json.loads(raw), hashlib.sha256(raw).hexdigest()
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_atomic(path, text: str) -> None:
    """Write through a temporary file in the same directory and rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".densecap-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
