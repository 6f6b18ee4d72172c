"""Exception hierarchy shared by every stage of the solver."""


class SemilinearError(Exception):
    """Base class for all package errors."""


class ConfigError(SemilinearError, ValueError):
    """A configuration value is missing or out of range.

    The message always starts with the dotted name of the offending field.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


# -- geometry -----------------------------------------------------------------

class GridError(SemilinearError, ValueError):
    pass


class EmptyInterior(GridError):
    pass


class DisconnectedInterior(GridError):
    pass


class ThinFeature(GridError):
    pass


class LogAtOrigin(SemilinearError, ValueError):
    pass


# -- operator / nonlinear ---------------------------------------------------

class Overflow(SemilinearError, ArithmeticError):
    """|u| left the range where exp(+-u) is representable."""


class SolverFailure(SemilinearError):
    pass


class LinearFailure(SolverFailure):
    pass


class DimensionMismatch(LinearFailure, ValueError):
    pass


class NotConverged(LinearFailure):
    pass


class IndefiniteBreakdown(LinearFailure):
    pass


class Breakdown(LinearFailure):
    pass


class NewtonStalled(SolverFailure):
    pass


class NewtonMaxIter(SolverFailure):
    pass


class ContinuationFailed(SolverFailure):
    def __init__(self, message, last_good=None):
        super().__init__(message)
        self.last_good = last_good


# -- diagnostics --------------------------------------------------------------

class GridMismatch(SemilinearError, ValueError):
    pass


class EmptyReflectionRegion(SemilinearError, ValueError):
    pass


class CenterOutsideDomain(SemilinearError, ValueError):
    pass


class TooShort(SemilinearError, ValueError):
    pass
