"""Exception hierarchy.

Every error carries a machine-readable ``code``; the CLI maps
:class:`ValidationError` subclasses to exit status 2 and
:class:`ConvergenceError` subclasses to exit status 3.
"""


class RelfitError(Exception):
    code = "relfit_error"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        out = {"code": self.code, "message": str(self)}
        if self.details:
            out["details"] = {k: _jsonable(v) for k, v in self.details.items()}
        return out


def _jsonable(value):
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    return str(value)


class ValidationError(RelfitError, ValueError):
    code = "validation_error"


class NonBinaryEntry(ValidationError):
    code = "non_binary_entry"


class ZeroColumn(ValidationError):
    code = "zero_column"


class RankDeficient(ValidationError):
    code = "rank_deficient"


class DimensionMismatch(ValidationError):
    code = "dimension_mismatch"


class ZeroData(ValidationError):
    code = "zero_data"


class EmptySet(ValidationError):
    code = "empty_set"


class FullSet(ValidationError):
    code = "full_set"


class TooLarge(ValidationError):
    code = "too_large"


class SupportViolation(ValidationError):
    code = "support_violation"


class NotInVariety(ValidationError):
    code = "not_in_variety"


class InvalidGamma(ValidationError):
    code = "invalid_gamma"


class ZeroMargin(ValidationError):
    code = "zero_margin"


class EmptyReducedModel(ValidationError):
    code = "empty_reduced_model"


class RankDeficientReduced(ValidationError):
    code = "rank_deficient_reduced"


class ParseError(ValidationError):
    code = "parse_error"


class LengthMismatch(ValidationError):
    code = "length_mismatch"


class NegativeCount(ValidationError):
    code = "negative_count"


class AllZero(ValidationError):
    code = "all_zero"


class ConvergenceError(RelfitError, RuntimeError):
    code = "convergence_error"


class MaxItersExceeded(ConvergenceError):
    """Raised when IPF or bisection hits its iteration cap.

    ``last_iterate`` and ``residual`` hold the state at the cap.
    """

    code = "max_iters_exceeded"

    def __init__(self, message="", last_iterate=None, residual=None, **details):
        super().__init__(message, residual=residual, **details)
        self.last_iterate = last_iterate
        self.residual = residual


class BracketFailure(ConvergenceError):
    code = "bracket_failure"


class FitVerificationError(ConvergenceError):
    """A finished fit failed its margin or variety post-check."""

    code = "fit_verification_failed"
