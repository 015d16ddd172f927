"""Exception types shared across the package."""


class PopsynError(Exception):
    """Base class for all validation-style errors raised by popsyn."""


class ShapeMismatchError(PopsynError):
    """Array shapes are incompatible for the requested operation."""


class EncodingError(PopsynError):
    """A record does not fit the schema it is being encoded under."""


class StateError(PopsynError):
    """An operation was called in an invalid order (e.g. backward before forward)."""


class SplitError(PopsynError):
    """A dataset split request cannot be satisfied."""


class DataFormatError(PopsynError):
    """A data or schema file is malformed."""


class ConfigError(PopsynError):
    """A run configuration is incomplete or inconsistent."""


class TrainingDivergedError(PopsynError):
    """Training produced a non-finite loss."""
