"""Exception types shared across the package."""


class MimoCrbError(Exception):
    """Base class for all package-specific errors."""


class InvalidGeometryError(MimoCrbError):
    """Raised when antenna-array construction parameters are invalid."""


class ShapeError(MimoCrbError):
    """Raised when matrix/vector dimensions or tags do not conform."""


class SingularCovarianceError(MimoCrbError):
    """Raised when a received-signal covariance matrix is not invertible."""


class DegenerateInformationError(MimoCrbError):
    """Raised when an information matrix carries no information at all
    (no finite bound exists)."""


class ConfigError(MimoCrbError):
    """Raised for unusable run configurations (CLI/config-file level)."""
