"""Maximum likelihood fitting by generalized iterative proportional fitting.

``ipf_gamma`` scales cyclically towards ``gamma * A q``; ``g_ipf`` adds the
bisection on ``gamma`` needed for multinomial models without the overall
effect; ``extended_mle`` is the full pipeline that also handles data whose
MLE lies on the boundary of the model.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import (
    BracketFailure,
    EmptyReducedModel,
    FitVerificationError,
    InvalidGamma,
    LengthMismatch,
    MaxItersExceeded,
    RankDeficientReduced,
    ValidationError,
    ZeroData,
    ZeroMargin,
)
from .geometry import FacialSet, has_positive_preimage, minimal_facial_set, restrict_columns
from .linalg import ModelMatrix, as_entries, exact_rank, has_overall_effect, mat_vec
from .model import (
    MULTINOMIAL,
    POISSON,
    PROBABILITY,
    INTENSITY,
    Distribution,
    ModelParameters,
    ObservedTable,
    bregman_divergence,
    derive_q,
    factor_parameters,
    variety_member,
)

log = logging.getLogger(__name__)

INTERIOR = "interior_mle"
EXTENDED = "extended_mle"
VARIETY_TOL = 1e-6
# sums farther than this from 1 are classified with a looser inner tolerance
_COARSE_BAND = 1e-3
_COARSE_TOL = 1e-7
_MAX_WIDENINGS = 8


@dataclass(frozen=True)
class FitConfig:
    margin_tol: float = 1e-10
    bisection_tol: float = 1e-9
    max_inner_iters: int = 10**6
    max_bisection_steps: int = 200

    def __post_init__(self):
        if not (self.margin_tol > 0 and self.bisection_tol > 0):
            raise ValidationError("tolerances must be positive")
        if self.max_inner_iters < 1 or self.max_bisection_steps < 1:
            raise ValidationError("iteration caps must be at least 1")


@dataclass
class FitResult:
    """Fitted distribution and everything needed to audit it.

    ``delta`` is the (extended) MLE, ``gamma`` the adjustment factor with
    ``A delta = gamma A q``. ``support`` and ``minimal_face`` use 0-based cell
    indices; ``minimal_face`` is None for an interior MLE.
    """

    delta: Distribution
    gamma: float
    status: str
    support: tuple
    q: tuple
    sampling: str
    minimal_face: Optional[FacialSet] = None
    theta: Optional[ModelParameters] = None
    overall_effect: bool = False
    diagnostics: dict = field(default_factory=dict)

    @property
    def fitted(self) -> np.ndarray:
        return self.delta.values


class IPFResult(NamedTuple):
    delta: np.ndarray
    iterations: int
    residual: float


class ZeroMarginReduction(NamedTuple):
    A_star: ModelMatrix
    q_star: tuple
    removed_cells: tuple
    removed_rows: tuple
    kept_cells: tuple
    kept_rows: tuple


class ExistenceReport(NamedTuple):
    exists: bool
    witness: Optional[tuple]
    minimal_face: Optional[FacialSet]


def _margin_residual(entries, delta, target):
    return float(np.max(np.abs(entries @ delta - target))) if len(target) else 0.0


def _ipf(entries, target, tol, max_updates):
    """Cyclic scaling from the all-ones vector towards margins ``target``."""
    masks = [row.astype(bool) for row in entries]
    scale = np.maximum(1.0, target)
    delta = np.ones(entries.shape[1])
    updates = 0
    while True:
        for mask, t in zip(masks, target):
            delta[mask] *= t / delta[mask].sum()
        updates += len(masks)
        gap = np.abs(entries @ delta - target)
        if np.all(gap <= tol * scale):
            return IPFResult(delta, updates, float(gap.max()))
        if updates >= max_updates:
            raise MaxItersExceeded(
                f"IPF did not reach margin tolerance {tol:g} in {updates} updates",
                last_iterate=delta,
                residual=float(gap.max()),
            )


def _float_q(q):
    return np.array([float(v) for v in q])


def ipf_gamma(A, q, gamma: float, cfg: FitConfig = FitConfig()) -> IPFResult:
    """IPF(gamma): limit of cyclic scaling of the rows of ``A``.

    Starts from ``delta = 1`` and applies, for ``j = 1..J`` in turn,
    ``delta_i *= (gamma A_j q / A_j delta) ** a_ji`` until every margin is
    within ``margin_tol * max(1, gamma A_j q)`` of its target after a full
    cycle. Entries converging to zero are left untouched.

    Raises
    ------
    InvalidGamma
        ``gamma <= 0``.
    ZeroMargin
        Some ``A_j q = 0``; reduce the model first.
    MaxItersExceeded
        More than ``cfg.max_inner_iters`` single-row updates were needed.
    """
    if not gamma > 0:
        raise InvalidGamma(f"gamma must be positive, got {gamma!r}")
    entries = as_entries(A).astype(float)
    qf = _float_q(q)
    margins = entries @ qf
    if np.any(margins <= 0):
        raise ZeroMargin(
            "some generating subsets have zero observed margin",
            rows=[int(j) for j in np.flatnonzero(margins <= 0)],
        )
    return _ipf(entries, gamma * margins, cfg.margin_tol, cfg.max_inner_iters)


def _bisect_gamma(entries, margins, cfg, diag):
    tight = min(cfg.margin_tol, cfg.bisection_tol / 10)
    coarse = max(tight, _COARSE_TOL)
    iters = diag["inner_iterations"]

    def evaluate(gamma, tol):
        res = _ipf(entries, gamma * margins, tol, cfg.max_inner_iters)
        iters.append(res.iterations)
        return res

    def total_at(gamma):
        res = evaluate(gamma, coarse)
        if abs(res.delta.sum() - 1) < _COARSE_BAND and coarse > tight:
            res = evaluate(gamma, tight)
        return res

    lo = 1.0 / margins.sum()
    hi = 1.0 / margins.max()
    s_lo = total_at(lo).delta.sum()
    s_hi = total_at(hi).delta.sum()
    widen = 0
    while s_hi < 1 and widen < _MAX_WIDENINGS:
        lo, s_lo = hi, s_hi
        hi *= 2
        s_hi = total_at(hi).delta.sum()
        widen += 1
    if not (s_lo <= 1 <= s_hi):
        raise BracketFailure(
            f"1 is not bracketed: sum {s_lo:.6g} at gamma {lo:.6g}, sum {s_hi:.6g} at gamma {hi:.6g}",
            gamma_left=lo, sum_left=s_lo, gamma_right=hi, sum_right=s_hi,
        )
    diag["bracket"] = [lo, hi]
    diag["bracket_widenings"] = widen
    for step in range(1, cfg.max_bisection_steps + 1):
        mid = 0.5 * (lo + hi)
        res = total_at(mid)
        s = res.delta.sum()
        diag["bisection_steps"] = step
        if abs(s - 1) <= cfg.bisection_tol:
            if res.residual > tight * max(1.0, mid * margins.max()):
                res = evaluate(mid, tight)
            return mid, res
        if s < 1:
            lo = mid
        else:
            hi = mid
        log.debug("bisection step %d: gamma=%.12g sum=%.12g", step, mid, s)
    raise MaxItersExceeded(
        f"bisection did not reach |sum - 1| <= {cfg.bisection_tol:g} "
        f"in {cfg.max_bisection_steps} steps",
        last_iterate=res.delta,
        residual=abs(s - 1),
    )


def _g_ipf_core(entries, q, sampling, cfg, overall_effect=None):
    """Run G-IPF on a reduced problem with positive margins.

    Returns ``(delta, gamma, diagnostics, overall_effect)``.
    """
    entries = np.asarray(entries, dtype=float)
    qf = _float_q(q)
    margins = entries @ qf
    if np.any(margins <= 0):
        raise ZeroMargin(
            "some generating subsets have zero observed margin",
            rows=[int(j) for j in np.flatnonzero(margins <= 0)],
        )
    diag = {"inner_iterations": [], "bisection_steps": 0}
    res = _ipf(entries, margins, cfg.margin_tol, cfg.max_inner_iters)
    diag["inner_iterations"].append(res.iterations)
    gamma = 1.0
    if sampling == MULTINOMIAL and abs(res.delta.sum() - 1) > cfg.bisection_tol:
        if overall_effect is None:
            overall_effect = has_overall_effect(entries.astype(np.int64))
        if overall_effect:
            # sum is 1 in the limit; the gap is IPF truncation
            res = _ipf(entries, margins, min(cfg.margin_tol, cfg.bisection_tol / 10),
                       cfg.max_inner_iters)
            diag["inner_iterations"].append(res.iterations)
        else:
            gamma, res = _bisect_gamma(entries, margins, cfg, diag)
    return res.delta, gamma, diag, overall_effect


def _finish_diagnostics(diag, entries, delta, gamma, qf, sampling):
    diag["margin_residual"] = _margin_residual(entries, delta, gamma * (entries @ qf))
    diag["total"] = float(delta.sum())
    if sampling == POISSON:
        diag["divergence"] = bregman_divergence(gamma * qf, delta)
    return diag


def g_ipf(A, table: ObservedTable, cfg: FitConfig = FitConfig()) -> FitResult:
    """G-IPF on ``A`` as given; requires every observed margin to be positive.

    Poisson data need IPF(1) only. Multinomial data without the overall
    effect bisect ``gamma`` on ``[1/(1'Aq), min_j 1/A_j q]`` until the
    IPF(gamma) limit sums to 1 within ``cfg.bisection_tol``.

    Cells are reported as zero only when they fall below a numeric threshold
    and lie outside the exact minimal facial set of ``q``. Boundary data are
    better handled by :func:`extended_mle`, which converges much faster.
    """
    entries = as_entries(A)
    n = entries.shape[1]
    q = derive_q(table)
    _check_length(entries, q)
    delta, gamma, diag, overall = _g_ipf_core(entries, q, table.sampling, cfg)
    face = minimal_facial_set(entries, q)
    exact_support = set(range(n)) if face is None else set(face.indices)
    threshold = np.sqrt(cfg.margin_tol) * delta.sum() / n
    delta = delta.copy()
    unresolved = []
    for i in range(n):
        if i in exact_support:
            continue
        if delta[i] < threshold:
            delta[i] = 0.0
        else:
            unresolved.append(i)
    diag["unresolved_cells"] = unresolved
    qf = _float_q(q)
    _finish_diagnostics(diag, entries.astype(float), delta, gamma, qf, table.sampling)
    return FitResult(
        delta=_distribution(table, delta, cfg),
        gamma=gamma,
        status=INTERIOR if face is None else EXTENDED,
        support=tuple(i for i in range(n) if delta[i] > 0),
        q=tuple(q),
        sampling=table.sampling,
        minimal_face=face,
        overall_effect=bool(overall) if overall is not None else has_overall_effect(entries),
        diagnostics=diag,
    )


def _distribution(table, delta, cfg):
    if table.sampling == MULTINOMIAL:
        return Distribution(delta, PROBABILITY, sum_tol=cfg.bisection_tol)
    return Distribution(delta, INTENSITY)


def _check_length(entries, q):
    if len(q) != entries.shape[1]:
        raise LengthMismatch(f"{len(q)} counts for {entries.shape[1]} cells")


def preprocess_zero_margins(A, q, require_full_rank: bool = True) -> ZeroMarginReduction:
    """Drop generating subsets with zero observed margin and all their cells.

    ``J0 = {j : A_j q = 0}`` and ``I0`` is the union of those subsets. The
    reduced matrix keeps the remaining columns and its nonzero rows.

    Raises
    ------
    EmptyReducedModel
        Every cell was removed.
    RankDeficientReduced
        ``require_full_rank`` is set and the reduced matrix lost full row rank.
    """
    entries = as_entries(A)
    q = [v if isinstance(v, Fraction) else Fraction(v) for v in q]
    _check_length(entries, q)
    if all(v == 0 for v in q):
        raise ZeroData("data vector is identically zero")
    margins = mat_vec(entries, q)
    zero_rows = [j for j, m in enumerate(margins) if m == 0]
    removed = sorted({int(i) for j in zero_rows for i in np.flatnonzero(entries[j])})
    kept_cells = [i for i in range(entries.shape[1]) if i not in set(removed)]
    if not kept_cells:
        raise EmptyReducedModel("all cells lie in generating subsets with zero margin")
    sub, kept_rows = restrict_columns(entries, kept_cells)
    removed_rows = tuple(j for j in range(entries.shape[0]) if j not in kept_rows)
    if require_full_rank:
        rank = exact_rank(sub.tolist())
        if rank < sub.shape[0]:
            raise RankDeficientReduced(
                f"reduced matrix has rank {rank} < {sub.shape[0]} rows",
                rows=list(kept_rows), rank=rank,
            )
    labels = None
    if isinstance(A, ModelMatrix) and A.labels is not None:
        labels = tuple(A.labels[i] for i in kept_cells)
    return ZeroMarginReduction(
        A_star=ModelMatrix(sub, labels=labels),
        q_star=tuple(q[i] for i in kept_cells),
        removed_cells=tuple(removed),
        removed_rows=removed_rows,
        kept_cells=tuple(kept_cells),
        kept_rows=tuple(kept_rows),
    )


def mle_exists(A, table: ObservedTable) -> ExistenceReport:
    """Whether the ordinary MLE exists; otherwise the minimal facial set of ``q``."""
    q = derive_q(table)
    _check_length(as_entries(A), q)
    exists, witness = has_positive_preimage(A, q)
    if exists:
        return ExistenceReport(True, witness, None)
    return ExistenceReport(False, None, minimal_facial_set(A, q))


def extended_mle(A, table: ObservedTable, cfg: FitConfig = FitConfig()) -> FitResult:
    """MLE in the closure of the model; exists for every nonzero table.

    Removes zero-margin subsets, restricts the fit to the exact minimal
    facial set of ``q`` (where the MLE is interior), runs G-IPF there and pads
    the other cells with exact zeros. The result is checked against the
    margin equations and variety membership before it is returned.

    Raises
    ------
    FitVerificationError
        The finished fit fails its margin or variety check.
    """
    entries = as_entries(A)
    n = entries.shape[1]
    q = derive_q(table)
    _check_length(entries, q)
    qf = _float_q(q)

    reduction = preprocess_zero_margins(entries, q, require_full_rank=False)
    report = mle_exists(entries, table)
    face = report.minimal_face
    fit_cells = list(range(n)) if face is None else list(face.indices)
    if not set(fit_cells) <= set(reduction.kept_cells):  # pragma: no cover
        raise AssertionError("minimal face escapes the zero-margin reduction")
    sub, kept_rows = restrict_columns(entries, fit_cells)
    q_sub = [q[i] for i in fit_cells]
    overall_sub = has_overall_effect(sub) if table.sampling == MULTINOMIAL else None
    delta_sub, gamma, diag, _ = _g_ipf_core(sub, q_sub, table.sampling, cfg, overall_sub)

    delta = np.zeros(n)
    delta[fit_cells] = delta_sub
    diag.update(
        removed_cells=list(reduction.removed_cells),
        removed_rows=list(reduction.removed_rows),
        face_cells=list(fit_cells),
        fit_rows=list(kept_rows),
    )
    ent_f = entries.astype(float)
    _finish_diagnostics(diag, ent_f, delta, gamma, qf, table.sampling)

    bound = cfg.margin_tol * max(1.0, float(np.max(gamma * (ent_f @ qf))))
    if diag["margin_residual"] > bound:
        raise FitVerificationError(
            f"margin residual {diag['margin_residual']:.3g} exceeds {bound:.3g}"
        )
    if not variety_member(delta, entries, tol=VARIETY_TOL):
        raise FitVerificationError("fitted distribution is not in the model closure")

    support = tuple(fit_cells)
    return FitResult(
        delta=_distribution(table, delta, cfg),
        gamma=gamma,
        status=INTERIOR if report.exists else EXTENDED,
        support=support,
        q=tuple(q),
        sampling=table.sampling,
        minimal_face=face,
        theta=factor_parameters(delta, entries),
        overall_effect=has_overall_effect(entries),
        diagnostics=diag,
    )
