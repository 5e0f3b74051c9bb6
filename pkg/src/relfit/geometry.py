"""Exact polyhedral diagnostics on the marginal cone of a model matrix.

The cone is the nonnegative hull of the columns of ``A``. Cell index sets are
0-based ``frozenset``/``tuple`` values throughout; only the CLI renders them
1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Optional

from .exceptions import (
    DimensionMismatch,
    EmptySet,
    FullSet,
    TooLarge,
    ValidationError,
    ZeroData,
)
from .linalg import as_entries, mat_vec
from .simplex import lp_solve

DEFAULT_MAX_CELLS = 20


@dataclass(frozen=True)
class FacialSet:
    """Cells on a proper face, with ``c'a_i = 0`` on the set and ``> 0`` off it."""

    indices: tuple
    certificate: tuple

    def __contains__(self, i):
        return i in self.indices

    def __len__(self):
        return len(self.indices)

    def verify(self, A) -> bool:
        entries = as_entries(A)
        inside = set(self.indices)
        for i in range(entries.shape[1]):
            val = sum((self.certificate[j] for j in range(entries.shape[0]) if entries[j, i]),
                      Fraction(0))
            if (i in inside and val != 0) or (i not in inside and val <= 0):
                return False
        return True


def _as_fractions(q) -> list[Fraction]:
    return [v if isinstance(v, Fraction) else Fraction(v) for v in q]


def _check_q(A, q):
    entries = as_entries(A)
    q = _as_fractions(q)
    if len(q) != entries.shape[1]:
        raise DimensionMismatch(f"vector of length {len(q)} for {entries.shape[1]} cells")
    if any(v < 0 for v in q):
        raise ValidationError("data vector has a negative entry")
    if all(v == 0 for v in q):
        raise ZeroData("data vector is identically zero")
    return entries, q


def has_positive_preimage(A, q):
    """Decide whether some ``z > 0`` has ``Az = Aq``.

    Solves ``max eps`` subject to ``Az = Aq``, ``z_i >= eps``, ``0 <= eps <= 1``.

    Returns
    -------
    (bool, tuple of Fraction or None)
        Decision and a strictly positive witness ``z`` when one exists.
    """
    entries, q = _check_q(A, q)
    if all(v > 0 for v in q):
        return True, tuple(q)
    J, n = entries.shape
    t = mat_vec(entries, q)
    A_eq = [[int(entries[j, i]) for i in range(n)] + [0] for j in range(J)]
    A_ub = [[-1 if k == i else 0 for k in range(n)] + [1] for i in range(n)]
    bounds = [(0, None)] * n + [(0, 1)]
    res = lp_solve([0] * n + [1], A_eq, t, A_ub, [0] * n, bounds)
    if res.is_optimal and res.optimum > 0:
        return True, res.solution[:n]
    return False, None


def _integer_certificate(c) -> tuple:
    den = reduce(lcm, (v.denominator for v in c), 1)
    ints = [int(v * den) for v in c]
    g = reduce(gcd, (abs(v) for v in ints), 0) or 1
    return tuple(Fraction(v // g) for v in ints)


def facial_certificate(A, F: Iterable[int]) -> Optional[tuple]:
    """Exact certificate ``c`` proving that cell set ``F`` is facial, or None.

    ``c`` satisfies ``c'a_i = 0`` for ``i`` in ``F`` and ``c'a_i > 0`` otherwise;
    it is scaled to coprime integers.
    """
    entries = as_entries(A)
    J, n = entries.shape
    F = set(F)
    if not F:
        raise EmptySet("facial set candidate is empty")
    if any(i < 0 or i >= n for i in F):
        raise DimensionMismatch(f"cell index out of range 0..{n - 1}")
    if len(F) == n:
        raise FullSet("the full cell set is not a proper face")
    A_eq = [[int(entries[j, i]) for j in range(J)] + [0] for i in sorted(F)]
    A_ub = [[-int(entries[j, i]) for j in range(J)] + [1] for i in range(n) if i not in F]
    bounds = [(None, None)] * J + [(0, 1)]
    res = lp_solve([0] * J + [1], A_eq, [0] * len(A_eq), A_ub, [0] * len(A_ub), bounds)
    if res.is_optimal and res.optimum > 0:
        return _integer_certificate(res.solution[:J])
    return None


def _minimal_face_indices(entries, q) -> frozenset:
    J, n = entries.shape
    t = mat_vec(entries, q)
    found = {i for i, v in enumerate(q) if v > 0}
    A_eq = [[int(entries[j, i]) for i in range(n)] for j in range(J)]
    for i in range(n):
        if i in found:
            continue
        bounds = [(0, None)] * n
        bounds[i] = (0, 1)
        obj = [0] * n
        obj[i] = 1
        res = lp_solve(obj, A_eq, t, bounds=bounds)
        if res.optimum > 0:
            # any positive coordinate of this solution is in the face as well
            found.update(k for k, v in enumerate(res.solution) if v > 0)
    return frozenset(found)


def minimal_facial_set(A, q) -> Optional[FacialSet]:
    """Smallest facial set containing ``supp(q)``.

    Computes ``F* = {i : some x >= 0 with Ax = Aq has x_i > 0}`` with one exact
    LP per undecided cell.

    Returns
    -------
    FacialSet or None
        None when ``F*`` is every cell, i.e. ``Aq`` is interior to the cone.
    """
    entries, q = _check_q(A, q)
    indices = _minimal_face_indices(entries, q)
    if len(indices) == entries.shape[1]:
        return None
    cert = facial_certificate(entries, indices)
    if cert is None:  # pragma: no cover - faces of a support are always certified
        raise AssertionError(f"minimal face {sorted(indices)} has no certificate")
    return FacialSet(tuple(sorted(indices)), cert)


def enumerate_facial_sets(A, max_cells: int = DEFAULT_MAX_CELLS) -> list[FacialSet]:
    """All proper facial sets of ``A``, sorted by size then lexicographically.

    Every nonempty proper support is mapped to its minimal face. Supports
    sandwiched between a support and its face share that face, so they are
    skipped.
    """
    entries = as_entries(A)
    n = entries.shape[1]
    if n > max_cells:
        raise TooLarge(f"{n} cells exceeds the enumeration cap of {max_cells}")
    full = (1 << n) - 1
    done = bytearray(1 << n)
    faces = {}
    for mask in range(1, full):
        if done[mask]:
            continue
        q = [Fraction((mask >> i) & 1) for i in range(n)]
        face = _minimal_face_indices(entries, q)
        fmask = sum(1 << i for i in face)
        # mark every S with mask <= S <= fmask
        free = fmask & ~mask
        sub = free
        while True:
            done[mask | sub] = 1
            if sub == 0:
                break
            sub = (sub - 1) & free
        if fmask != full and fmask not in faces:
            faces[fmask] = face
    out = []
    for face in faces.values():
        cert = facial_certificate(entries, face)
        out.append(FacialSet(tuple(sorted(face)), cert))
    out.sort(key=lambda f: (len(f.indices), f.indices))
    return out


def restrict_columns(A, cells: Iterable[int]):
    """Columns ``cells`` of ``A`` with all-zero rows removed.

    Returns ``(sub_entries, kept_rows)``.
    """
    entries = as_entries(A)
    cells = sorted(cells)
    sub = entries[:, cells]
    kept = [j for j in range(entries.shape[0]) if sub[j].any()]
    return sub[kept], kept
