"""Exception hierarchy shared across the package."""


class BellCVError(Exception):
    """Base class for all package errors."""


class DegenerateConditioning(BellCVError):
    """The joint click probability vanishes, so the conditional state is undefined."""


class RangeError(BellCVError, ValueError):
    """A parameter lies outside its physical range or is not finite."""


class InternalInconsistency(BellCVError):
    """An analytically guaranteed inequality failed; indicates a bug."""


class NoCrossing(BellCVError):
    """B_CHSH never reaches 2 on the search bracket."""


class TruncationTooCoarse(BellCVError):
    """The Fock cutoff discards more weight than the requested tolerance."""


class DimensionOverflow(BellCVError):
    """The requested Fock cutoff exceeds the configured cap."""


class GridTooCoarse(BellCVError):
    """A quadrature grid fails its normalization check."""
