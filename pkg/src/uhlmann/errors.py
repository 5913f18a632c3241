"""Exception types shared across the package."""


class UhlmannError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(UhlmannError, ValueError):
    """Operands have incompatible shapes."""


class NotHermitianError(UhlmannError, ValueError):
    """Matrix fails a Hermitian symmetry check."""


class NotPsdError(UhlmannError, ValueError):
    """Matrix has an eigenvalue below the allowed negative tolerance."""


class NoConvergenceError(UhlmannError):
    """An iterative decomposition exhausted its budget."""


class NotNormalizedError(UhlmannError, ValueError):
    """State vector norm deviates from 1 beyond tolerance."""


class ZeroFidelityError(UhlmannError, ValueError):
    """Reduced states have (numerically) orthogonal supports."""


class NotPartialIsometryError(UhlmannError, ValueError):
    """Operator is not a partial isometry within tolerance."""


class NotUnitaryError(UhlmannError, ValueError):
    """Operator is not unitary within tolerance."""


class FrameMismatchError(UhlmannError, ValueError):
    """Identity-frame data fails its self-consistency check."""


class BadParamsError(UhlmannError, ValueError):
    """Construction parameters outside the allowed range."""


class NotInvertibleError(UhlmannError, ValueError):
    """Matrix required to be invertible is numerically singular."""


class EpsilonTooLargeError(UhlmannError, ValueError):
    """Overlap deficit exceeds what the construction supports."""


class DegenerateProjectionError(UhlmannError, ValueError):
    """Spectral projection selected an empty eigenspace."""


class IllConditionedError(UhlmannError):
    """A quantity is not numerically trustworthy for this input."""


class ConsistencyError(UhlmannError):
    """Two redundant computations of the same fact disagree."""
