"""Input validation helpers shared by the estimator and the CLI."""

import numpy as np

from .exceptions import AllZero, LengthMismatch, NegativeCount, ValidationError
from .linalg import ModelMatrix, validate_model_matrix


def check_model_matrix(A, labels=None) -> ModelMatrix:
    """Accept a ModelMatrix, a DataFrame (columns become labels) or a 2-d array."""
    if isinstance(A, ModelMatrix):
        return A
    if A is None:
        raise ValidationError("a model matrix is required")
    if labels is None and hasattr(A, "columns") and hasattr(A, "to_numpy"):
        labels = [str(c) for c in A.columns]
        A = A.to_numpy()
    raw = np.asarray(A)
    if raw.ndim != 2:
        raise ValidationError(f"model matrix must be 2-d, got {raw.ndim}-d")
    if raw.dtype.kind == "f":
        if not np.all(raw == np.round(raw)):
            bad = np.argwhere(raw != np.round(raw))[0]
            raise ValidationError(f"non-integer entry at ({bad[0] + 1},{bad[1] + 1})")
        raw = raw.astype(np.int64)
    return validate_model_matrix(raw.tolist(), labels=labels)


def check_counts(X, n_cells=None) -> tuple:
    """Return counts as a tuple of ints.

    ``X`` may be 1-d or a single row/column 2-d array.
    """
    arr = np.asarray(X)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise ValidationError(f"counts must be a single row or column, got shape {arr.shape}")
    if arr.dtype.kind not in "iuf":
        try:
            arr = arr.astype(float)
        except (TypeError, ValueError) as exc:
            raise ValidationError("counts must be numeric") from exc
    if not np.all(np.isfinite(arr)) or not np.all(arr == np.round(arr)):
        raise ValidationError("counts must be finite integers")
    if n_cells is not None and arr.size != n_cells:
        raise LengthMismatch(f"{arr.size} counts for {n_cells} cells", expected=n_cells, got=int(arr.size))
    if np.any(arr < 0):
        raise NegativeCount(
            "counts must be nonnegative",
            cells=[int(i) + 1 for i in np.flatnonzero(arr < 0)],
        )
    if not np.any(arr > 0):
        raise AllZero("all counts are zero")
    return tuple(int(v) for v in arr)


def check_sampling(sampling: str) -> str:
    if sampling not in ("poisson", "multinomial"):
        raise ValidationError(f"sampling must be 'poisson' or 'multinomial', got {sampling!r}")
    return sampling
