"""CSV ingestion and JSON documents for the command line tool.

Cell and row indices are 1-based in every emitted document. Exact values
(model data, certificates, kernel rows, witnesses) are ``"num/den"`` strings;
fitted values are binary64 floats written in shortest round-trip form.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from ._validation import check_counts
from .exceptions import LengthMismatch, NonBinaryEntry, ParseError
from .geometry import FacialSet
from .linalg import ModelMatrix, validate_model_matrix
from .model import Distribution, ModelParameters, ObservedTable, PROBABILITY, INTENSITY

SCHEMA_VERSION = 1
_INDEX_KEYS = ("removed_cells", "face_cells", "unresolved_cells", "removed_rows", "fit_rows")


def _read_rows(path):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if any(tok.strip() for tok in r)]
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}", path=str(path)) from exc
    if not rows:
        raise ParseError(f"{path} is empty", path=str(path))
    return [[tok.strip() for tok in r] for r in rows]


def _is_int(tok):
    try:
        int(tok)
        return True
    except ValueError:
        return False


def _split_header(rows):
    if rows and not all(_is_int(t) for t in rows[0]):
        return rows[0], rows[1:]
    return None, rows


def parse_matrix_csv(path) -> ModelMatrix:
    """Read a 0-1 model matrix; rows are generating subsets, columns cells.

    An optional first row of non-numeric cell labels is kept as labels.
    """
    labels, body = _split_header(_read_rows(path))
    if not body:
        raise ParseError(f"{path} has no matrix rows", path=str(path))
    width = len(labels) if labels is not None else len(body[0])
    offset = 2 if labels is not None else 1
    raw = []
    for r, row in enumerate(body):
        if len(row) != width:
            raise ParseError(
                f"line {r + offset} has {len(row)} fields, expected {width}",
                line=r + offset, path=str(path),
            )
        vals = []
        for c, tok in enumerate(row):
            if tok not in ("0", "1"):
                raise ParseError(
                    f"entry {tok!r} at line {r + offset}, column {c + 1} is not 0 or 1",
                    line=r + offset, column=c + 1, path=str(path),
                )
            vals.append(int(tok))
        raw.append(vals)
    try:
        return validate_model_matrix(raw, labels=labels)
    except NonBinaryEntry as exc:  # pragma: no cover - caught above
        raise ParseError(str(exc)) from exc


def _flatten(rows, path):
    if len(rows) == 1:
        return rows[0]
    if all(len(r) == 1 for r in rows):
        return [r[0] for r in rows]
    raise ParseError(f"{path} must be a single row or a single column", path=str(path))


def parse_counts_csv(path, matrix: ModelMatrix | None = None, sampling: str = "multinomial"):
    """Read one row (or column) of nonnegative integer counts."""
    rows = _read_rows(path)
    labels = None
    if len(rows) >= 2 and not all(_is_int(t) for t in rows[0]) and all(_is_int(t) for t in rows[1]):
        labels, rows = rows[0], rows[1:]
    tokens = _flatten(rows, path)
    try:
        values = [int(t) for t in tokens]
    except ValueError as exc:
        raise ParseError(f"{path}: counts must be integers ({exc})", path=str(path)) from exc
    n = matrix.num_cells if matrix is not None else None
    counts = check_counts(values, n)
    if labels is not None:
        if len(labels) != len(counts):
            raise LengthMismatch(f"{len(labels)} labels for {len(counts)} counts")
        if matrix is not None and matrix.labels is not None and tuple(labels) != matrix.labels:
            raise ParseError(
                f"count labels {labels} do not match matrix labels {list(matrix.labels)}",
                path=str(path),
            )
    return ObservedTable(counts, sampling)


def parse_vector_csv(path) -> list:
    """Read a nonnegative vector; entries stay exact (``"1/8"``, ``"0.25"``)."""
    rows = _read_rows(path)
    if len(rows) >= 2 and not all(_is_number(t) for t in rows[0]):
        rows = rows[1:]
    out = []
    for tok in _flatten(rows, path):
        try:
            out.append(Fraction(tok))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"{path}: {tok!r} is not a number", path=str(path)) from exc
    return out


def parse_integer_matrix_csv(path) -> list:
    """Read an integer matrix (e.g. a kernel basis), one row per line."""
    rows = _read_rows(path)
    width = len(rows[0])
    out = []
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"line {r + 1} has {len(row)} fields, expected {width}",
                             line=r + 1, path=str(path))
        try:
            out.append([int(t) for t in row])
        except ValueError as exc:
            raise ParseError(f"line {r + 1}: {exc}", line=r + 1, path=str(path)) from exc
    return out


def _is_number(tok):
    try:
        Fraction(tok)
        return True
    except (ValueError, ZeroDivisionError):
        return False


def frac_str(v) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def parse_frac(s) -> Fraction:
    return Fraction(s)


def _one_based(indices):
    return [int(i) + 1 for i in indices]


def _zero_based(indices):
    return [int(i) - 1 for i in indices]


def face_to_dict(face: FacialSet | None):
    if face is None:
        return None
    return {"cells": _one_based(face.indices), "certificate": [frac_str(c) for c in face.certificate]}


def face_from_dict(d) -> FacialSet | None:
    if d is None:
        return None
    return FacialSet(tuple(_zero_based(d["cells"])), tuple(parse_frac(c) for c in d["certificate"]))


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def fit_result_to_dict(result, matrix: ModelMatrix, counts=None) -> dict:
    labels = matrix.cell_labels() if isinstance(matrix, ModelMatrix) else [
        str(i + 1) for i in range(len(result.q))]
    if counts is None:
        counts = [None] * len(labels)
    cells = [
        {"label": lab, "fitted": float(f), "observed": obs, "q": frac_str(qv)}
        for lab, f, obs, qv in zip(labels, result.fitted, counts, result.q)
    ]
    theta = None
    if result.theta is not None:
        theta = {
            "theta": [float(t) for t in result.theta.theta],
            "beta": [None if not np.isfinite(b) else float(b) for b in result.theta.beta],
            "zero_rows": _one_based(result.theta.zero_rows),
            "unique": bool(result.theta.unique),
        }
    diag = _plain(dict(result.diagnostics))
    for key in _INDEX_KEYS:
        if key in diag:
            diag[key] = _one_based(diag[key])
    return {
        "schema": f"relfit/fit/{SCHEMA_VERSION}",
        "sampling": result.sampling,
        "cells": cells,
        "gamma": float(result.gamma),
        "status": result.status,
        "support": _one_based(result.support),
        "minimal_face": face_to_dict(result.minimal_face),
        "theta": theta,
        "overall_effect": bool(result.overall_effect),
        "diagnostics": diag,
    }


def fit_result_from_dict(doc: dict):
    """Inverse of :func:`fit_result_to_dict`."""
    from .fit import FitResult

    fitted = np.array([c["fitted"] for c in doc["cells"]], dtype=float)
    kind = PROBABILITY if doc["sampling"] == "multinomial" else INTENSITY
    theta = None
    if doc["theta"] is not None:
        t = doc["theta"]
        theta = ModelParameters(
            np.array(t["theta"], dtype=float),
            np.array([-np.inf if b is None else b for b in t["beta"]], dtype=float),
            tuple(_zero_based(t["zero_rows"])),
            t["unique"],
        )
    diag = dict(doc["diagnostics"])
    for key in _INDEX_KEYS:
        if key in diag:
            diag[key] = _zero_based(diag[key])
    return FitResult(
        delta=Distribution(fitted, kind, sum_tol=1.0),
        gamma=doc["gamma"],
        status=doc["status"],
        support=tuple(_zero_based(doc["support"])),
        q=tuple(parse_frac(c["q"]) for c in doc["cells"]),
        sampling=doc["sampling"],
        minimal_face=face_from_dict(doc["minimal_face"]),
        theta=theta,
        overall_effect=doc["overall_effect"],
        diagnostics=diag,
    )


def dumps(doc: dict) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def loads(text: str) -> dict:
    return json.loads(text)


def write_document(doc: dict, path) -> None:
    Path(path).write_text(dumps(doc))
