import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from relfit import RelationalMLE
from relfit.exceptions import LengthMismatch, NegativeCount, ValidationError
from relfit.linalg import validate_model_matrix

from cases import INDEP3, INDEP3_LABELS, BOUNDARY, BOUNDARY_COUNTS, SAMPLE_COUNTS, SAMPLE_MULTINOMIAL_PCT


def test_params_round_trip_through_clone():
    est = RelationalMLE(INDEP3, sampling="poisson", margin_tol=1e-11)
    params = est.get_params()
    assert params["sampling"] == "poisson" and params["margin_tol"] == 1e-11
    twin = clone(est)
    assert twin.get_params()["max_bisection_steps"] == 200
    assert not hasattr(twin, "fitted_")


def test_multinomial_fit_and_expected_counts():
    est = RelationalMLE(INDEP3).fit(SAMPLE_COUNTS)
    np.testing.assert_allclose(100 * est.predict(), SAMPLE_MULTINOMIAL_PCT, atol=0.01)
    np.testing.assert_allclose(est.expected_counts(), est.fitted_ * 100)
    assert est.status_ == "interior_mle"
    assert est.n_features_in_ == 7
    assert est.theta_.shape == (3,)


def test_poisson_expected_counts_are_intensities():
    est = RelationalMLE(INDEP3, sampling="poisson").fit(SAMPLE_COUNTS)
    assert est.gamma_ == 1.0
    np.testing.assert_allclose(est.expected_counts(), est.fitted_)


def test_score_is_maximal_at_fit():
    est = RelationalMLE(INDEP3).fit(SAMPLE_COUNTS)
    base = est.score()
    other = RelationalMLE(INDEP3).fit([1, 1, 1, 1, 1, 1, 1])
    q = np.array(SAMPLE_COUNTS) / 100
    assert base >= float(np.sum(q * np.log(other.fitted_)))


def test_boundary_fit():
    est = RelationalMLE(BOUNDARY).fit(np.array(BOUNDARY_COUNTS).reshape(1, -1))
    assert est.status_ == "extended_mle"
    assert est.support_ == est.minimal_face_.indices == (0, 1, 3, 4)
    assert est.theta_ is None
    assert not est.mle_exists(BOUNDARY_COUNTS).exists


def test_accepts_model_matrix_and_dataframe():
    pd = pytest.importorskip("pandas")
    frame = pd.DataFrame(INDEP3, columns=INDEP3_LABELS)
    a = RelationalMLE(frame).fit(SAMPLE_COUNTS)
    b = RelationalMLE(validate_model_matrix(INDEP3)).fit(SAMPLE_COUNTS)
    assert a.model_matrix_.labels == tuple(INDEP3_LABELS)
    np.testing.assert_array_equal(a.fitted_, b.fitted_)


def test_not_fitted():
    with pytest.raises(NotFittedError):
        RelationalMLE(INDEP3).predict()


@pytest.mark.parametrize(
    "counts, error",
    [([1, 2, 3], LengthMismatch), ([1, -1, 1, 1, 1, 1, 1], NegativeCount),
     ([0.5] * 7, ValidationError), ([[1, 2], [3, 4]], ValidationError)],
)
def test_bad_counts(counts, error):
    with pytest.raises(error):
        RelationalMLE(INDEP3).fit(counts)


def test_bad_sampling_and_matrix():
    with pytest.raises(ValidationError):
        RelationalMLE(INDEP3, sampling="binomial").fit(SAMPLE_COUNTS)
    with pytest.raises(ValidationError):
        RelationalMLE(None).fit(SAMPLE_COUNTS)
    with pytest.raises(ValidationError):
        RelationalMLE([[1.5, 1.0]]).fit([1, 1])
