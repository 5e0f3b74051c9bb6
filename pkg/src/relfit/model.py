"""Model semantics: data reduction, divergence, variety membership, factorization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .exceptions import (
    DimensionMismatch,
    NotInVariety,
    SupportViolation,
    ValidationError,
    ZeroData,
)
from .geometry import facial_certificate
from .linalg import as_entries, nullspace

PROBABILITY = "probability"
INTENSITY = "intensity"
POISSON = "poisson"
MULTINOMIAL = "multinomial"


@dataclass(frozen=True)
class Distribution:
    values: np.ndarray
    kind: str = INTENSITY
    sum_tol: float = field(default=1e-12, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.kind not in (PROBABILITY, INTENSITY):
            raise ValidationError(f"unknown distribution kind {self.kind!r}")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValidationError("distribution values must be finite and nonnegative")
        if self.kind == PROBABILITY and abs(vals.sum() - 1.0) > self.sum_tol:
            raise ValidationError(f"probabilities sum to {vals.sum()!r}, not 1")

    @property
    def support(self) -> tuple:
        return tuple(int(i) for i in np.flatnonzero(self.values > 0))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class ObservedTable:
    counts: tuple
    sampling: str = MULTINOMIAL

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(int(c) != c for c in self.counts):
            raise ValidationError("counts must be integers")
        if any(c < 0 for c in counts):
            raise ValidationError("counts must be nonnegative")
        if sum(counts) == 0:
            raise ZeroData("all counts are zero")
        if self.sampling not in (POISSON, MULTINOMIAL):
            raise ValidationError(f"unknown sampling scheme {self.sampling!r}")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def q(self) -> list[Fraction]:
        return derive_q(self)

    @property
    def kind(self) -> str:
        return PROBABILITY if self.sampling == MULTINOMIAL else INTENSITY

    def __len__(self):
        return len(self.counts)


@dataclass(frozen=True)
class ModelParameters:
    """Multiplicative parameters ``theta`` and ``beta = log theta``.

    ``zero_rows`` lists generating subsets that contain only zero cells; they
    get ``theta = 0`` (``beta = -inf``) by convention. ``unique`` is False when
    the parameters are not identified on the support and the minimum-norm
    ``beta`` was reported.
    """

    theta: np.ndarray
    beta: np.ndarray
    zero_rows: tuple = ()
    unique: bool = True


@dataclass(frozen=True)
class DualReport:
    """Per kernel-row monomials ``delta^{d+}`` and ``delta^{d-}``.

    ``ratios[k]`` is None when the ``d-`` monomial vanishes.
    """

    plus: tuple
    minus: tuple
    ratios: tuple = field(default=())
    differences: tuple = field(default=())

    def satisfied(self, tol: float = 1e-10) -> bool:
        return all(abs(d) <= tol for d in self.differences)


def derive_q(table: ObservedTable) -> list[Fraction]:
    """Observed data vector: counts for Poisson, proportions for multinomial."""
    if table.sampling == POISSON:
        return [Fraction(c) for c in table.counts]
    n = table.total
    return [Fraction(c, n) for c in table.counts]


def bregman_divergence(t, u) -> float:
    """``sum t log(t/u) + sum u - sum t`` with ``0 log 0 = 0``.

    Raises
    ------
    SupportViolation
        Some ``t_i > 0`` has ``u_i = 0``.
    """
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    if t.shape != u.shape:
        raise DimensionMismatch(f"shapes {t.shape} and {u.shape} differ")
    if np.any(t < 0) or np.any(u < 0):
        raise ValidationError("divergence arguments must be nonnegative")
    pos = t > 0
    if np.any(pos & (u == 0)):
        raise SupportViolation(
            "supp(t) is not contained in supp(u)",
            cells=[int(i) for i in np.flatnonzero(pos & (u == 0))],
        )
    val = float(np.sum(t[pos] * np.log(t[pos] / u[pos])) + u.sum() - t.sum())
    return max(val, 0.0)


def monomial(delta, exponents) -> object:
    """``prod delta_i ** e_i`` over positive exponents, with ``0**0 = 1``."""
    out = 1
    for d, e in zip(delta, exponents):
        if e > 0:
            out = out * d ** int(e)
    return out


def dual_report(delta, D) -> DualReport:
    """Evaluate the odds-ratio and cross-product forms for each row of ``D``.

    This check depends on the chosen kernel basis when ``delta`` has zeros;
    use :func:`variety_member` for a basis-free decision.
    """
    values = delta.values if isinstance(delta, Distribution) else delta
    exact = all(isinstance(v, (Fraction, int)) for v in values)
    if not exact:
        values = [float(v) for v in values]
    plus, minus, ratios, diffs = [], [], [], []
    for d in D:
        if len(d) != len(values):
            raise DimensionMismatch(f"kernel row of length {len(d)} for {len(values)} cells")
        p = monomial(values, [max(e, 0) for e in d])
        m = monomial(values, [max(-e, 0) for e in d])
        plus.append(p)
        minus.append(m)
        ratios.append(None if m == 0 else p / m)
        diffs.append(p - m)
    return DualReport(tuple(plus), tuple(minus), tuple(ratios), tuple(diffs))


def _positive_member(values, sub_entries, tol) -> bool:
    basis = nullspace(sub_entries.tolist())
    if not basis:
        return True
    if all(isinstance(v, (Fraction, int)) for v in values):
        return all(
            monomial(values, [max(e, 0) for e in d]) == monomial(values, [max(-e, 0) for e in d])
            for d in basis
        )
    logs = np.log(np.asarray(values, dtype=float))
    D = np.array(basis, dtype=float)
    return bool(np.max(np.abs(D @ logs)) <= tol)


def variety_member(delta, A, tol: float = 1e-8) -> bool:
    """Basis-independent test of ``delta`` in the toric variety of ``A``.

    Positive ``delta`` is checked through ``D log delta = 0`` for one kernel
    basis. Otherwise the support must be facial, and ``delta`` restricted to
    it must lie in the variety of the column-restricted matrix. Rational
    input is decided exactly.
    """
    values = list(delta.values if isinstance(delta, Distribution) else delta)
    entries = as_entries(A)
    n = entries.shape[1]
    if len(values) != n:
        raise DimensionMismatch(f"distribution of length {len(values)} for {n} cells")
    support = [i for i, v in enumerate(values) if v > 0]
    if len(support) == n:
        return _positive_member(values, entries, tol)
    if not support:
        return True
    if facial_certificate(entries, support) is None:
        return False
    sub = entries[:, support]
    sub = sub[sub.any(axis=1)]
    return _positive_member([values[i] for i in support], sub, tol)


def a_feasible(support, A) -> bool:
    """Every zero cell lies in a generating subset disjoint from the support."""
    entries = as_entries(A)
    support = set(support)
    zeros = [i for i in range(entries.shape[1]) if i not in support]
    if not zeros:
        return True
    sup = sorted(support)
    free_rows = [j for j in range(entries.shape[0]) if not entries[j, sup].any()]
    return all(any(entries[j, i] for j in free_rows) for i in zeros)


def build_distribution(theta, A) -> np.ndarray:
    """Cell parameters ``delta_i = prod_j theta_j ** a_ji``."""
    entries = as_entries(A)
    theta = np.asarray(theta, dtype=float)
    return np.prod(np.where(entries == 1, theta[:, None], 1.0), axis=0)


def factor_parameters(delta, A, residual_tol: float = 1e-8) -> Optional[ModelParameters]:
    """Multiplicative parameters of ``delta`` under ``A``, or None.

    Returns None when the support is not A-feasible. Otherwise solves
    ``log delta_S = A_{R,S}' beta_R`` by minimum-norm least squares over the
    support ``S`` and the rows ``R`` meeting it.

    Raises
    ------
    NotInVariety
        The least-squares residual exceeds ``residual_tol``.
    """
    values = np.asarray(delta.values if isinstance(delta, Distribution) else delta, dtype=float)
    entries = as_entries(A)
    support = np.flatnonzero(values > 0)
    if not a_feasible(support.tolist(), entries):
        return None
    rows = [j for j in range(entries.shape[0]) if entries[j, support].any()]
    zero_rows = tuple(j for j in range(entries.shape[0]) if j not in rows)
    M = entries[np.ix_(rows, support)].T.astype(float)
    target = np.log(values[support])
    beta_r, _, rank, _ = np.linalg.lstsq(M, target, rcond=None)
    resid = float(np.max(np.abs(M @ beta_r - target))) if len(target) else 0.0
    if resid > residual_tol:
        raise NotInVariety(f"log-linear residual {resid:.3g} exceeds {residual_tol:g}",
                           residual=resid)
    beta = np.full(entries.shape[0], -np.inf)
    beta[rows] = beta_r
    theta = np.exp(beta)
    return ModelParameters(theta, beta, zero_rows, unique=bool(rank == len(rows)))


def log_likelihood(q: Sequence, delta, sampling: str) -> float:
    """Kernel of the log-likelihood with ``0 log 0 = 0``.

    Multinomial: ``sum q log p``. Poisson: ``sum q log lambda - sum lambda``.
    """
    q = np.asarray([float(v) for v in q])
    delta = np.asarray(delta, dtype=float)
    pos = q > 0
    if np.any(delta[pos] <= 0):
        return -math.inf
    ll = float(np.sum(q[pos] * np.log(delta[pos])))
    if sampling == POISSON:
        ll -= float(delta.sum())
    return ll
