"""Exception types raised across the package."""


class ValidationError(ValueError):
    """An input violates a documented invariant."""


class NotPSDError(ValidationError):
    """Matrix is not positive semidefinite within tolerance."""


class UndefinedCoherenceError(ValidationError):
    """Degree of coherence needs both aperture intensities to be nonzero."""


class SingularKernelError(ValidationError):
    """The inversion kernel does not exist (or is numerically useless) at this angle."""


class UnsamplableError(ValidationError):
    """A distribution with negative entries cannot be sampled."""
