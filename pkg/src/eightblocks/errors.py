"""Exception types shared across the package."""


class EightBlocksError(Exception):
    """Base class for all package errors."""


class InvalidInputError(EightBlocksError, ValueError):
    """Malformed colorings, triples, coordinates or option values."""


class InstanceFormatError(EightBlocksError, ValueError):
    """Instance text or matrix that does not describe a cube collection."""


class CertificateError(EightBlocksError):
    """Arrangement extraction or verification failed."""


class UnsupportedModelError(EightBlocksError):
    """Model cannot be expressed in the requested export format."""


class TableConstructionError(EightBlocksError):
    """Internal invariant failure while building the variety table."""


class ExperimentError(EightBlocksError):
    """A packaged experiment produced a result that fails its own checks."""
