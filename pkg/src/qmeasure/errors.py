"""Exception types shared across the package."""


class QMeasureError(Exception):
    """Base class for all package errors."""


class ConfigurationError(QMeasureError, ValueError):
    """Chain lengths, dimensions or experiment settings do not fit together."""


class DomainError(QMeasureError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class ResourceError(QMeasureError):
    """A requested computation exceeds the configured size caps."""


class PreclusionError(QMeasureError):
    """Conditioning on an outcome (or event) whose probability is zero."""
