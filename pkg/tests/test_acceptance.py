"""End-to-end acceptance criteria; a PASS/FAIL line per criterion is printed at the end of the run."""

import numpy as np
import pytest
from scipy.optimize import brentq

from relfit.exceptions import RankDeficient, ZeroColumn
from relfit.fit import EXTENDED, INTERIOR, extended_mle, mle_exists, preprocess_zero_margins
from relfit.geometry import enumerate_facial_sets
from relfit.linalg import validate_model_matrix
from relfit.model import (
    ObservedTable,
    bregman_divergence,
    build_distribution,
    dual_report,
    factor_parameters,
    log_likelihood,
    variety_member,
)

from cases import (
    INDEP3,
    INDEP3_FACES,
    BOUNDARY,
    BOUNDARY_COUNTS,
    BOUNDARY_MLE,
    CUBE_ROOT_C,
    KERNEL_RREF,
    KERNEL_ALT,
    SAMPLE_COUNTS,
    SAMPLE_MULTINOMIAL_PCT,
    SAMPLE_POISSON,
    frac,
)
from oracle import reference_mle

pytestmark = pytest.mark.acceptance


def random_model(rng, max_rows, max_cells):
    while True:
        J = int(rng.integers(1, max_rows + 1))
        n = int(rng.integers(J, max_cells + 1))
        raw = rng.integers(0, 2, size=(J, n)).tolist()
        try:
            return validate_model_matrix(raw)
        except (ZeroColumn, RankDeficient):
            continue


def normalized_model_point(beta, entries):
    """Scale ``beta`` along the all-ones direction until the cells sum to 1."""
    colsum = entries.sum(axis=0)
    base = entries.T @ beta

    def excess(s):
        return np.exp(base + s * colsum).sum() - 1

    lo, hi = -1.0, 1.0
    while excess(lo) > 0:
        lo *= 2
    while excess(hi) < 0:
        hi *= 2
    s = brentq(excess, lo, hi, xtol=1e-15)
    return np.exp(base + s * colsum)


def margin_residual(entries, result):
    target = result.gamma * (entries @ np.array([float(v) for v in result.q]))
    return np.max(np.abs(entries @ result.fitted - target)), max(1.0, np.max(np.abs(target)))


@pytest.mark.criterion(1, "three-factor independence fit, multinomial")
def test_sample_table_multinomial():
    res = extended_mle(INDEP3, ObservedTable(SAMPLE_COUNTS, "multinomial"))
    np.testing.assert_allclose(100 * res.fitted, SAMPLE_MULTINOMIAL_PCT, atol=0.01)
    assert abs(res.fitted.sum() - 1) <= 1e-9


@pytest.mark.criterion(2, "three-factor independence fit, Poisson")
def test_sample_table_poisson():
    res = extended_mle(INDEP3, ObservedTable(SAMPLE_COUNTS, "poisson"))
    np.testing.assert_allclose(res.fitted, SAMPLE_POISSON, atol=0.01)
    assert abs(res.fitted.sum() - 79.73) <= 0.02
    assert res.gamma == 1


@pytest.mark.criterion(3, "closed-form fit for a single corner cell")
def test_corner_cell_closed_form():
    res = extended_mle(INDEP3, ObservedTable((0, 0, 0, 0, 0, 0, 1), "multinomial"))
    c = CUBE_ROOT_C
    np.testing.assert_allclose(res.fitted, [c, c, c, c**2, c**2, c**2, c**3], rtol=0, atol=1e-6)
    assert res.status == INTERIOR


@pytest.mark.criterion(4, "extended MLE on boundary data")
def test_extended_mle_boundary():
    table = ObservedTable(BOUNDARY_COUNTS, "multinomial")
    report = mle_exists(BOUNDARY, table)
    assert report.exists is False
    assert [i + 1 for i in report.minimal_face.indices] == [1, 2, 4, 5]
    res = extended_mle(BOUNDARY, table)
    np.testing.assert_allclose(res.fitted, BOUNDARY_MLE, rtol=0, atol=1e-6)
    assert abs(res.gamma - 0.875) <= 1e-6
    assert res.status == EXTENDED
    assert factor_parameters(res.fitted, BOUNDARY) is None
    assert res.theta is None


@pytest.mark.criterion(5, "facial sets of the independence matrix")
def test_facial_enumeration():
    faces = enumerate_facial_sets(validate_model_matrix(INDEP3))
    assert sorted(f.indices for f in faces) == sorted(INDEP3_FACES)
    assert len(faces) == 6
    assert all(f.verify(INDEP3) for f in faces)


@pytest.mark.criterion(6, "basis dependence of the cross-product check")
def test_basis_dependence():
    delta = frac(0, 0, 0, 1, 1, 1, 0)
    assert all(d == 0 for d in dual_report(delta, KERNEL_ALT).differences)
    assert any(d != 0 for d in dual_report(delta, KERNEL_RREF).differences)
    assert variety_member(delta, INDEP3) is False
    assert variety_member([float(v) for v in delta], INDEP3) is False


@pytest.mark.criterion(7, "randomized property suite")
def test_random_property_suite():
    rng = np.random.default_rng(1729)
    n_cases = 0
    while n_cases < 200:
        A = random_model(rng, 5, 10)
        entries = A.entries.astype(float)
        counts = tuple(int(v) for v in rng.integers(1, 30, size=A.num_cells))
        sampling = ("poisson", "multinomial")[n_cases % 2]
        res = extended_mle(A, ObservedTable(counts, sampling))
        n_cases += 1

        resid, scale = margin_residual(entries, res)
        assert resid <= 1e-8 * scale
        assert variety_member(res.fitted, A, tol=1e-6)

        q = np.array([float(v) for v in res.q])
        fitted_beta = np.log(res.theta.theta)
        for k in range(100):
            if k % 2:
                beta = rng.normal(0, 1.5, size=A.J)
            else:
                beta = fitted_beta + rng.normal(0, 0.05, size=A.J)
            if sampling == "poisson":
                delta = build_distribution(np.exp(beta), A)
                assert bregman_divergence(q, res.fitted) <= bregman_divergence(q, delta) + 1e-9
            else:
                delta = normalized_model_point(beta, entries)
                assert (log_likelihood(q, res.fitted, sampling)
                        >= log_likelihood(q, delta, sampling) - 1e-9)

        rebuilt = build_distribution(res.theta.theta, A)
        np.testing.assert_allclose(rebuilt, res.fitted, rtol=1e-10, atol=0)
        theta = np.exp(rng.normal(0, 1, size=A.J))
        recovered = factor_parameters(build_distribution(theta, A), A)
        np.testing.assert_allclose(recovered.theta, theta, rtol=1e-10, atol=0)
    assert n_cases >= 200


@pytest.mark.criterion(8, "agreement with an independent optimizer")
def test_oracle_equivalence():
    rng = np.random.default_rng(31337)
    with_zeros = 0
    for k in range(25):
        sampling = ("poisson", "multinomial")[k % 2]
        A = random_model(rng, 4, 8)
        while True:
            counts = rng.integers(0, 8, size=A.num_cells)
            if k % 3:
                counts[rng.integers(0, A.num_cells)] = 0
            else:
                counts = np.maximum(counts, 1)
            table = ObservedTable(tuple(int(c) for c in counts), sampling)
            if counts.sum() and mle_exists(A, table).exists:
                break
        with_zeros += int((counts == 0).any())
        res = extended_mle(A, table)
        ref = reference_mle(A.entries, table.counts, sampling)
        np.testing.assert_allclose(res.fitted, ref, rtol=0, atol=1e-4)
    assert with_zeros >= 10


@pytest.mark.criterion(9, "zero-margin reduction pipeline")
@pytest.mark.parametrize("sampling", ["poisson", "multinomial"])
def test_zero_margin_pipeline(sampling):
    counts = (0, 6, 2, 0, 0, 9, 0)
    table = ObservedTable(counts, sampling)
    red = preprocess_zero_margins(INDEP3, table.q)
    assert [i + 1 for i in red.removed_cells] == [1, 4, 5, 7]
    assert red.removed_rows == (0,)
    res = extended_mle(INDEP3, table)
    assert all(res.fitted[i] == 0.0 for i in red.removed_cells)
    reduced = red.A_star.entries.astype(float)
    fitted = res.fitted[list(red.kept_cells)]
    target = res.gamma * (reduced @ np.array([float(v) for v in red.q_star]))
    assert np.max(np.abs(reduced @ fitted - target)) <= 1e-8 * max(1.0, np.max(target))
    assert all(res.fitted[i] > 0 for i in red.kept_cells)
