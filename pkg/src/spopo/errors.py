"""Exception and warning types raised across the package."""


class SpopoError(Exception):
    """Base class for all errors raised by :mod:`spopo`."""


class DimensionMismatch(SpopoError, ValueError):
    pass


class SingularMatrix(SpopoError, ValueError):
    pass


class NotPositiveDefinite(SpopoError, ValueError):
    pass


class NotSymplectic(SpopoError, ValueError):
    pass


class NotUnitary(SpopoError, ValueError):
    pass


class IndexOutOfRange(SpopoError, IndexError):
    pass


class InvalidSpec(SpopoError, ValueError):
    pass


class InvalidEigenvalue(SpopoError, ValueError):
    pass


class GridTooCoarse(SpopoError, ValueError):
    pass


class InvalidPumpRatio(SpopoError, ValueError):
    pass


class BandOverlap(SpopoError, ValueError):
    pass


class NonPositiveInput(SpopoError, ValueError):
    pass


class IncompleteSet(SpopoError, ValueError):
    """A measurement set is missing records needed for assembly.

    The ``missing`` attribute lists ``(bands, quadrature)`` tuples with
    1-based band indices.
    """

    def __init__(self, missing):
        self.missing = list(missing)
        shown = ", ".join(f"{q}{list(b)}" for b, q in self.missing[:12])
        more = "" if len(self.missing) <= 12 else f" (+{len(self.missing) - 12} more)"
        super().__init__(f"measurement set incomplete, missing: {shown}{more}")


class InvalidEta(SpopoError, ValueError):
    pass


class ZeroVariance(SpopoError, ValueError):
    pass


class DegenerateBasis(SpopoError, ValueError):
    pass


class UnphysicalVariances(SpopoError, ValueError):
    pass


class TooManyModes(SpopoError, ValueError):
    pass


class UnknownGraph(SpopoError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown graph"


class WrongAngleCount(SpopoError, ValueError):
    pass


class UnphysicalWarning(UserWarning):
    """A covariance matrix violates the uncertainty relation by a small amount."""


class NoImprovementWarning(UserWarning):
    """Cluster-basis optimization did not bring the objective below shot noise."""


class DegenerateSpectrumWarning(UserWarning):
    """The analytic eigenvalue progression collapsed (ratio equals zero)."""
