"""Exception taxonomy. Every domain failure carries a stable ``code`` string."""


class CohstateError(Exception):
    """Base class for all errors raised by this package."""

    code = "ERROR"

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context

    def __str__(self):
        base = super().__str__()
        if self.context:
            items = ", ".join(f"{k}={v!r}" for k, v in sorted(self.context.items()))
            return f"[{self.code}] {base} ({items})"
        return f"[{self.code}] {base}"


class HermiticityFailure(CohstateError):
    code = "HERMITICITY_FAILURE"


class ClosureFailure(CohstateError):
    code = "CLOSURE_FAILURE"


class ProjectionResidual(CohstateError):
    code = "PROJECTION_RESIDUAL"


class NormalizationError(CohstateError):
    code = "NORMALIZATION"


class RankAmbiguous(CohstateError):
    code = "RANK_AMBIGUOUS"


class ContainmentViolation(CohstateError):
    code = "CONTAINMENT_VIOLATION"


class DegenerateOrbit(CohstateError):
    code = "DEGENERATE_ORBIT"


class ChartExit(CohstateError):
    code = "CHART_EXIT"


class NonsmoothPath(CohstateError):
    code = "NONSMOOTH_PATH"


class CanonicalizationRequired(CohstateError):
    code = "CANONICALIZATION_REQUIRED"


class QuadratureUnderresolved(CohstateError):
    code = "QUADRATURE_UNDERRESOLVED"


class ResourceLimit(CohstateError):
    code = "RESOURCE_LIMIT"


class ParseError(CohstateError):
    code = "PARSE_ERROR"


class ValidationError(CohstateError):
    code = "VALIDATION_ERROR"


class QuadratureWarning(UserWarning):
    """Advisory: quadrature below the exactness contract, results degrade."""


#: Errors that signal a well-posed but infeasible request (CLI exit code 2);
#: everything else arriving at the CLI boundary is a usage error (exit code 1).
DOMAIN_ERRORS = (DegenerateOrbit, ChartExit, RankAmbiguous, QuadratureUnderresolved)
