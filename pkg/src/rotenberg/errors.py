"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A model object or configuration violates its invariants."""


class CoverageError(RuntimeError):
    """An evaluation needs data outside the truncated extension grid."""


class NumericsError(RuntimeError):
    """A computation produced non-finite values."""
