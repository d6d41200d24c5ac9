"""Exception hierarchy shared by every module.

The CLI maps ``UsageError`` subclasses to exit code 2 and everything raised by a
failed verification to exit code 1.
"""


class RamseyLoccError(Exception):
    """Base class for all package errors."""


class UsageError(RamseyLoccError):
    """Bad input: malformed query, file, or argument."""


class InvalidQueryError(UsageError):
    pass


class ResourceError(RamseyLoccError):
    """A computation would exceed its configured budget."""


class NotOrthogonalError(UsageError):
    def __init__(self, pair):
        self.pair = tuple(pair)
        super().__init__(f"states {self.pair[0]} and {self.pair[1]} are not orthogonal in any subsystem")


class AmbiguousOrthogonalityError(UsageError):
    def __init__(self, pair, subsystem, modulus):
        self.pair = tuple(pair)
        self.subsystem = subsystem
        self.modulus = modulus
        super().__init__(
            f"overlap of states {self.pair[0]} and {self.pair[1]} in subsystem {subsystem} "
            f"is {modulus:.3e}, inside the (zero_tol, gap_tol) gap"
        )


class DimensionError(UsageError):
    pass


class RealizationError(RamseyLoccError):
    pass


class NotCertifiedError(UsageError):
    pass


class InternalConsistencyError(RamseyLoccError):
    """A clique guaranteed by a certified Ramsey bound was not found."""


class InvalidMeasurementError(UsageError):
    pass


class InvalidTreeError(UsageError):
    pass


class UncertifiableError(UsageError):
    pass
