"""Exact two-phase simplex over Fractions with Bland's anti-cycling rule."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .exceptions import DimensionMismatch

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    optimum: Optional[Fraction] = None
    solution: Optional[tuple] = None

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


def _fr(v):
    return v if isinstance(v, Fraction) else Fraction(v)


class _Tableau:
    """Canonical-form tableau ``T y = rhs`` with basis and reduced costs."""

    def __init__(self, rows, rhs, basis):
        self.T = rows
        self.rhs = rhs
        self.basis = basis
        self.reduced = []
        self.value = Fraction(0)

    def set_costs(self, costs):
        n = len(costs)
        self.reduced = list(costs)
        self.value = Fraction(0)
        for i, b in enumerate(self.basis):
            cb = costs[b]
            if cb:
                row = self.T[i]
                for j in range(n):
                    if row[j]:
                        self.reduced[j] -= cb * row[j]
                self.value += cb * self.rhs[i]

    def pivot(self, r, c):
        row = self.T[r]
        p = row[c]
        if p != 1:
            row = [v / p for v in row]
            self.T[r] = row
            self.rhs[r] /= p
        nz = [j for j, v in enumerate(row) if v]
        for i in range(len(self.T)):
            if i == r:
                continue
            f = self.T[i][c]
            if f:
                other = self.T[i]
                for j in nz:
                    other[j] -= f * row[j]
                self.rhs[i] -= f * self.rhs[r]
        f = self.reduced[c]
        if f:
            for j in nz:
                self.reduced[j] -= f * row[j]
            self.value += f * self.rhs[r]
        self.basis[r] = c

    def run(self, allowed):
        """Maximize; returns OPTIMAL or UNBOUNDED."""
        while True:
            enter = next((j for j in allowed if self.reduced[j] > 0), None)
            if enter is None:
                return OPTIMAL
            best = None
            for i, row in enumerate(self.T):
                a = row[enter]
                if a > 0:
                    key = (self.rhs[i] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return UNBOUNDED
            self.pivot(best[1], enter)


def _check_matrix(M, b, n, name):
    if M is None:
        if b is not None and len(b):
            raise DimensionMismatch(f"{name} right-hand side given without a matrix")
        return [], []
    M = [list(r) for r in M]
    if b is None or len(M) != len(b):
        raise DimensionMismatch(f"{name}: {len(M)} rows but {0 if b is None else len(b)} bounds")
    for r in M:
        if len(r) != n:
            raise DimensionMismatch(f"{name}: row of length {len(r)}, expected {n}")
    return [[_fr(v) for v in r] for r in M], [_fr(v) for v in b]


def lp_solve(
    c: Sequence,
    A_eq=None,
    b_eq=None,
    A_ub=None,
    b_ub=None,
    bounds=None,
    maximize: bool = True,
) -> LPResult:
    """Solve a small linear program exactly.

    Optimizes ``c'x`` subject to ``A_eq x = b_eq``, ``A_ub x <= b_ub`` and
    per-variable ``bounds`` given as ``(lo, hi)`` pairs, where ``None`` means
    unbounded on that side. The default bound is ``(0, None)``.

    Parameters
    ----------
    c : sequence of rationals
        Objective coefficients.
    maximize : bool
        Maximize when true (the default), minimize otherwise.

    Returns
    -------
    LPResult
        ``status`` is one of ``"optimal"``, ``"infeasible"``, ``"unbounded"``.
        When optimal, ``solution`` satisfies every constraint exactly.
    """
    c = [_fr(v) for v in c]
    n = len(c)
    eq_rows, eq_rhs = _check_matrix(A_eq, b_eq, n, "A_eq")
    ub_rows, ub_rhs = _check_matrix(A_ub, b_ub, n, "A_ub")
    if bounds is None:
        bounds = [(0, None)] * n
    if len(bounds) != n:
        raise DimensionMismatch(f"{len(bounds)} bounds for {n} variables")
    sign = 1 if maximize else -1

    # x_k = shift_k + sum(coef * y_col) with y >= 0
    shift = [Fraction(0)] * n
    subst = []
    n_y = 0
    extra_ub = []
    for k, (lo, hi) in enumerate(bounds):
        if lo is not None:
            lo = _fr(lo)
            shift[k] = lo
            subst.append([(n_y, Fraction(1))])
            if hi is not None:
                if _fr(hi) < lo:
                    return LPResult(INFEASIBLE)
                extra_ub.append((n_y, _fr(hi) - lo))
            n_y += 1
        elif hi is not None:
            shift[k] = _fr(hi)
            subst.append([(n_y, Fraction(-1))])
            n_y += 1
        else:
            subst.append([(n_y, Fraction(1)), (n_y + 1, Fraction(-1))])
            n_y += 2

    def transform(row, rhs):
        out = [Fraction(0)] * n_y
        for k, a in enumerate(row):
            if a:
                rhs -= a * shift[k]
                for col, coef in subst[k]:
                    out[col] += a * coef
        return out, rhs

    cons = []  # (row over y, rhs, is_ub)
    for row, rhs in zip(eq_rows, eq_rhs):
        cons.append((*transform(row, rhs), False))
    for row, rhs in zip(ub_rows, ub_rhs):
        cons.append((*transform(row, rhs), True))
    for col, ub in extra_ub:
        row = [Fraction(0)] * n_y
        row[col] = Fraction(1)
        cons.append((row, ub, True))
    cost_y, _ = transform([sign * v for v in c], Fraction(0))

    n_slack = sum(1 for *_, is_ub in cons if is_ub)
    m = len(cons)
    n_struct = n_y + n_slack
    n_total = n_struct + m
    rows, rhs_list = [], []
    s = n_y
    for i, (row, rhs, is_ub) in enumerate(cons):
        full = row + [Fraction(0)] * (n_slack + m)
        if is_ub:
            full[s] = Fraction(1)
            s += 1
        if rhs < 0:
            full = [-v for v in full]
            rhs = -rhs
        full[n_struct + i] = Fraction(1)
        rows.append(full)
        rhs_list.append(rhs)

    tab = _Tableau(rows, rhs_list, [n_struct + i for i in range(m)])
    phase1 = [Fraction(0)] * n_struct + [Fraction(-1)] * m
    tab.set_costs(phase1)
    tab.run(range(n_total))
    if tab.value < 0:
        return LPResult(INFEASIBLE)

    # drive zero-level artificials out of the basis; drop redundant rows
    i = 0
    while i < len(tab.T):
        if tab.basis[i] >= n_struct:
            col = next((j for j in range(n_struct) if tab.T[i][j] != 0), None)
            if col is None:
                del tab.T[i], tab.rhs[i], tab.basis[i]
                continue
            tab.pivot(i, col)
        i += 1
    tab.T = [r[:n_struct] for r in tab.T]
    tab.set_costs(cost_y + [Fraction(0)] * n_slack)
    if tab.run(range(n_struct)) == UNBOUNDED:
        return LPResult(UNBOUNDED)

    y = [Fraction(0)] * n_struct
    for i, b in enumerate(tab.basis):
        y[b] = tab.rhs[i]
    x = [shift[k] + sum((coef * y[col] for col, coef in subst[k]), Fraction(0))
         for k in range(n)]
    optimum = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    _verify(x, eq_rows, eq_rhs, ub_rows, ub_rhs, bounds)
    return LPResult(OPTIMAL, optimum, tuple(x))


def _verify(x, eq_rows, eq_rhs, ub_rows, ub_rhs, bounds):
    for row, b in zip(eq_rows, eq_rhs):
        assert sum(a * v for a, v in zip(row, x)) == b
    for row, b in zip(ub_rows, ub_rhs):
        assert sum(a * v for a, v in zip(row, x)) <= b
    for v, (lo, hi) in zip(x, bounds):
        assert lo is None or v >= lo
        assert hi is None or v <= hi
