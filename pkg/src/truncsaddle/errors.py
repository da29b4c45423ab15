"""Semantic exception hierarchy for the truncated-CGF toolkit."""


class TruncSaddleError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(TruncSaddleError):
    """A distribution family or experiment spec received invalid parameters."""


class UnknownFamilyError(TruncSaddleError):
    """Requested distribution family is not in the catalog."""


class OutsideStripError(TruncSaddleError):
    """CGF evaluation requested outside the open convergence strip."""


class OutOfRangeError(TruncSaddleError):
    """Saddlepoint level not attained by the relevant derivative."""


class NoRootInBranchError(TruncSaddleError):
    """The branch-restricted saddlepoint equation has no sign change."""


class NoConvergenceError(TruncSaddleError):
    """Root iteration exhausted its budget without meeting tolerance."""


class NonFiniteStencilError(TruncSaddleError):
    """A finite-difference stencil point evaluated to a non-finite value."""


class QuadratureError(TruncSaddleError):
    """Adaptive quadrature failed to meet its accuracy targets."""


class DegenerateWindowError(TruncSaddleError):
    """Approximate window mass is non-positive (method breakdown on this window)."""


class ApproximationBreakdownError(TruncSaddleError):
    """A convolution-form difference came out non-positive; not silently clamped."""


class SecondOrderTermError(TruncSaddleError):
    """The second-order correction factor is non-finite or non-positive (pole proximity)."""


class SeriesDivergenceError(TruncSaddleError):
    """Geometric series for the observed-sojourn MGF diverges at this argument."""


class AcceptanceTooLowError(TruncSaddleError):
    """Rejection sampling acceptance probability is below the safety floor."""


class DefectiveCgfError(TruncSaddleError):
    """An approximate CGF violated convexity/monotonicity where it was relied on."""
