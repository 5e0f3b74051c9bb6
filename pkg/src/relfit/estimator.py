"""Scikit-learn style front end for relational-model MLE."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_counts, check_model_matrix, check_sampling
from .fit import FitConfig, extended_mle, mle_exists
from .model import ObservedTable, log_likelihood


class RelationalMLE(BaseEstimator):
    """Maximum likelihood estimate under a relational model.

    Parameters
    ----------
    model_matrix : array-like of shape (J, n_cells) or ModelMatrix
        0-1 matrix whose rows are the generating subsets.
    sampling : {"multinomial", "poisson"}
        Sampling scheme of the observed counts.
    margin_tol, bisection_tol, max_inner_iters, max_bisection_steps
        Passed through to :class:`relfit.fit.FitConfig`.

    Attributes
    ----------
    fitted_ : ndarray of shape (n_cells,)
        Cell probabilities (multinomial) or intensities (Poisson). Cells off
        the minimal facial set are exactly zero.
    gamma_ : float
        Adjustment factor, ``A fitted_ = gamma_ A q``.
    status_ : str
        ``"interior_mle"`` or ``"extended_mle"``.
    support_ : tuple of int
        0-based indices of the positive cells.
    minimal_face_ : FacialSet or None
    theta_ : ndarray or None
        Multiplicative parameters when the support is A-feasible.
    result_ : FitResult

    Examples
    --------
    >>> A = [[1, 0, 0, 1, 1, 0, 1], [0, 1, 0, 1, 0, 1, 1], [0, 0, 1, 0, 1, 1, 1]]
    >>> est = RelationalMLE(A, sampling="poisson").fit([10, 14, 25, 5, 3, 16, 27])
    >>> round(float(est.fitted_.sum()), 2)
    79.74
    """

    def __init__(
        self,
        model_matrix=None,
        sampling="multinomial",
        margin_tol=1e-10,
        bisection_tol=1e-9,
        max_inner_iters=10**6,
        max_bisection_steps=200,
    ):
        self.model_matrix = model_matrix
        self.sampling = sampling
        self.margin_tol = margin_tol
        self.bisection_tol = bisection_tol
        self.max_inner_iters = max_inner_iters
        self.max_bisection_steps = max_bisection_steps

    def _config(self):
        return FitConfig(
            margin_tol=self.margin_tol,
            bisection_tol=self.bisection_tol,
            max_inner_iters=self.max_inner_iters,
            max_bisection_steps=self.max_bisection_steps,
        )

    def _table(self, X):
        A = check_model_matrix(self.model_matrix)
        counts = check_counts(X, A.num_cells)
        return A, ObservedTable(counts, check_sampling(self.sampling))

    def fit(self, X, y=None):
        """Fit to one table of counts ``X`` (ignored ``y`` for API symmetry)."""
        A, table = self._table(X)
        result = extended_mle(A, table, self._config())
        self.model_matrix_ = A
        self.result_ = result
        self.counts_ = np.asarray(table.counts)
        self.fitted_ = np.array(result.fitted)
        self.gamma_ = result.gamma
        self.status_ = result.status
        self.support_ = result.support
        self.minimal_face_ = result.minimal_face
        self.theta_ = None if result.theta is None else np.array(result.theta.theta)
        self.n_features_in_ = A.num_cells
        return self

    def predict(self, X=None):
        """Fitted cell parameters; ``X`` is accepted and ignored."""
        check_is_fitted(self, "fitted_")
        return self.fitted_.copy()

    def expected_counts(self):
        """Fitted counts: ``N p`` for multinomial, intensities for Poisson."""
        check_is_fitted(self, "fitted_")
        if self.sampling == "multinomial":
            return self.fitted_ * self.counts_.sum()
        return self.fitted_.copy()

    def score(self, X=None, y=None):
        """Log-likelihood kernel of ``X`` (default: the fitted counts) at ``fitted_``."""
        check_is_fitted(self, "fitted_")
        counts = self.counts_ if X is None else np.asarray(check_counts(X, self.n_features_in_))
        q = counts / counts.sum() if self.sampling == "multinomial" else counts
        return log_likelihood(q, self.fitted_, self.sampling)

    def mle_exists(self, X):
        """Existence diagnosis for counts ``X`` without fitting."""
        A, table = self._table(X)
        return mle_exists(A, table)
