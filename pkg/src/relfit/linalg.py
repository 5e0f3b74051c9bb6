"""Exact rational linear algebra over 0-1 model matrices.

Everything here works on :class:`fractions.Fraction` (or ``int``) entries so
that rank, kernel and row-space decisions never depend on a floating-point
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Optional, Sequence

import numpy as np

from .exceptions import (
    DimensionMismatch,
    NonBinaryEntry,
    RankDeficient,
    ValidationError,
    ZeroColumn,
)


@dataclass(frozen=True)
class ModelMatrix:
    """A validated J x |I| 0-1 model matrix.

    Rows are the generating subsets, columns are cells. Build instances with
    :func:`validate_model_matrix`; the constructor does not check anything.
    """

    entries: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @property
    def J(self) -> int:
        return self.entries.shape[0]

    @property
    def num_cells(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self):
        return self.entries.shape

    def column(self, i: int) -> np.ndarray:
        return self.entries[:, i]

    def to_fractions(self) -> list[list[Fraction]]:
        return [[Fraction(int(v)) for v in row] for row in self.entries]

    def cell_labels(self) -> list[str]:
        if self.labels is not None:
            return list(self.labels)
        return [str(i + 1) for i in range(self.num_cells)]

    def __eq__(self, other):
        if not isinstance(other, ModelMatrix):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(
            self.entries, other.entries
        )

    def __hash__(self):
        return hash((self.entries.tobytes(), self.entries.shape, self.labels))


@dataclass(frozen=True)
class KernelBasis:
    """Integer rows spanning Ker(A); ``rows`` has shape (K, |I|)."""

    rows: tuple
    num_cells: int = field(default=0)

    @property
    def K(self) -> int:
        return len(self.rows)

    def as_array(self) -> np.ndarray:
        if not self.rows:
            return np.zeros((0, self.num_cells))
        return np.array([[float(v) for v in r] for r in self.rows])

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


def as_entries(A) -> np.ndarray:
    """Return the integer entry array of a ModelMatrix or array-like."""
    if isinstance(A, ModelMatrix):
        return A.entries
    return np.asarray(A, dtype=np.int64)


def validate_model_matrix(raw, labels=None) -> ModelMatrix:
    """Check a raw integer matrix and wrap it as a :class:`ModelMatrix`.

    Raises
    ------
    NonBinaryEntry
        Some entry is not 0 or 1.
    ZeroColumn
        Some cell belongs to no generating subset.
    RankDeficient
        The exact rank is smaller than the number of rows.
    """
    try:
        rows = [list(r) for r in raw]
    except TypeError as exc:
        raise ValidationError("model matrix must be a 2-d array") from exc
    if not rows or not rows[0]:
        raise ValidationError("model matrix is empty")
    width = len(rows[0])
    for r, row in enumerate(rows):
        if len(row) != width:
            raise DimensionMismatch(f"row {r + 1} has {len(row)} entries, expected {width}")
        for c, v in enumerate(row):
            if v not in (0, 1) or isinstance(v, bool):
                raise NonBinaryEntry(f"entry ({r + 1},{c + 1}) is {v!r}", row=r + 1, column=c + 1)
    arr = np.array(rows, dtype=np.int64)
    zero_cols = np.flatnonzero(arr.sum(axis=0) == 0)
    if zero_cols.size:
        raise ZeroColumn(
            f"columns {[int(c) + 1 for c in zero_cols]} are all zero",
            columns=[int(c) + 1 for c in zero_cols],
        )
    rank = exact_rank(rows)
    if rank < arr.shape[0]:
        raise RankDeficient(f"rank {rank} < J = {arr.shape[0]}", rank=rank, J=arr.shape[0])
    if labels is not None and len(labels) != width:
        raise DimensionMismatch(f"{len(labels)} labels for {width} cells")
    return ModelMatrix(arr, labels=tuple(labels) if labels is not None else None)


def _to_fraction_rows(M) -> list[list[Fraction]]:
    if isinstance(M, ModelMatrix):
        return M.to_fractions()
    return [[Fraction(v) for v in row] for row in M]


def _integer_row(row: Sequence[Fraction]) -> list[int]:
    den = reduce(lcm, (f.denominator for f in row), 1)
    return [int(f * den) for f in row]


def exact_rank(M) -> int:
    """Rank over the rationals by fraction-free (Bareiss) elimination."""
    rows = [_integer_row(r) for r in _to_fraction_rows(M)]
    if not rows:
        return 0
    n_rows, n_cols = len(rows), len(rows[0])
    rank, prev = 0, 1
    for col in range(n_cols):
        piv = next((r for r in range(rank, n_rows) if rows[r][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank][col]
        for i in range(rank + 1, n_rows):
            f = rows[i][col]
            for k in range(col + 1, n_cols):
                rows[i][k] = (rows[i][k] * p - f * rows[rank][k]) // prev
            rows[i][col] = 0
        prev = p
        rank += 1
        if rank == n_rows:
            break
    return rank


def rref(M):
    """Reduced row echelon form over Fractions.

    Returns ``(R, pivots)`` where ``R`` holds only the nonzero rows.
    """
    R = _to_fraction_rows(M)
    if not R:
        return [], []
    n_rows, n_cols = len(R), len(R[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if R[i][c] != 0), None)
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        p = R[r][c]
        R[r] = [v / p for v in R[r]]
        for i in range(n_rows):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    return R[:r], pivots


def _normalize_integer(vec: Sequence[Fraction]) -> tuple:
    ints = _integer_row(vec)
    content = reduce(gcd, (abs(v) for v in ints), 0)
    if content == 0:
        return tuple(ints)
    ints = [v // content for v in ints]
    lead = next(v for v in ints if v != 0)
    if lead < 0:
        ints = [-v for v in ints]
    return tuple(ints)


def nullspace(M) -> list[tuple]:
    """Integer basis of the right null space of any rational matrix.

    Free variables are taken in ascending column order; each basis vector is
    scaled to integers with content 1 and a positive leading entry.
    """
    rows = _to_fraction_rows(M)
    if not rows:
        return []
    n_cols = len(rows[0])
    R, pivots = rref(rows)
    pivot_set = set(pivots)
    basis = []
    for f in range(n_cols):
        if f in pivot_set:
            continue
        vec = [Fraction(0)] * n_cols
        vec[f] = Fraction(1)
        for r, p in enumerate(pivots):
            vec[p] = -R[r][f]
        basis.append(_normalize_integer(vec))
    return basis


def kernel_basis(A: ModelMatrix) -> KernelBasis:
    """Deterministic integer basis of Ker(A) with K = |I| - J rows."""
    return KernelBasis(tuple(nullspace(A)), num_cells=as_entries(A).shape[1])


def solve_exact(M, b) -> Optional[list[Fraction]]:
    """One exact solution of ``M x = b`` (free variables set to 0), or None."""
    rows = _to_fraction_rows(M)
    if len(rows) != len(b):
        raise DimensionMismatch(f"{len(rows)} equations but {len(b)} right-hand sides")
    n_cols = len(rows[0]) if rows else 0
    aug = [row + [Fraction(v)] for row, v in zip(rows, b)]
    R, pivots = rref(aug)
    if pivots and pivots[-1] == n_cols:
        return None
    x = [Fraction(0)] * n_cols
    for r, p in enumerate(pivots):
        x[p] = R[r][n_cols]
    return x


def row_space_contains(A, v):
    """Decide whether ``v`` lies in the row space of ``A``.

    Returns
    -------
    (bool, list of Fraction or None)
        The decision and, when true, coefficients ``k`` with ``k'A = v'``.
    """
    entries = as_entries(A)
    if len(v) != entries.shape[1]:
        raise DimensionMismatch(f"vector of length {len(v)} for {entries.shape[1]} cells")
    transposed = [[Fraction(int(entries[j, i])) for j in range(entries.shape[0])]
                  for i in range(entries.shape[1])]
    k = solve_exact(transposed, [Fraction(x) for x in v])
    return (k is not None), k


def has_overall_effect(A) -> bool:
    return row_space_contains(A, [1] * as_entries(A).shape[1])[0]


def mat_vec(A, x) -> list:
    """Exact product of a 0-1 matrix with a vector of Fractions."""
    entries = as_entries(A)
    return [sum((x[i] for i in np.flatnonzero(row)), Fraction(0)) for row in entries]
