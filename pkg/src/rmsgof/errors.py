"""Exception hierarchy shared across the package."""


class RmsgofError(Exception):
    """Base class for all rmsgof errors."""


class NonPositiveProbability(RmsgofError):
    """A bin weight is zero or negative (the inverse-probability matrix needs 1/p)."""


class TooFewBins(RmsgofError):
    """A distribution needs at least two bins."""


class NotFinite(RmsgofError):
    """A bin weight is NaN or infinite."""


class ParseError(RmsgofError):
    """Malformed distribution input; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class UnsupportedBinCount(RmsgofError):
    """A builtin family does not support the requested number of bins."""


class DegenerateSpectrum(RmsgofError):
    """More than one eigenvalue is indistinguishable from the structural zero."""


class QuadratureBudgetExceeded(RmsgofError):
    """Adaptive subdivision hit its cap before reaching tolerance.

    The best available estimate is attached as ``evaluation``.
    """

    def __init__(self, evaluation):
        super().__init__(
            "quadrature subdivision budget exhausted "
            f"(error estimate {evaluation.error_estimate:.3e})"
        )
        self.evaluation = evaluation


class OracleDidNotConverge(RmsgofError):
    """The principal-value reference integral failed to stabilize."""


class LengthMismatch(RmsgofError):
    """Counts and model distribution have different numbers of bins."""


class NotBracketed(RmsgofError):
    """The draw-count search bounds do not bracket the target success rate."""
