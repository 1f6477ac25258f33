"""Exception types shared across the package."""


class PolypdetError(Exception):
    """Base class for all package errors."""


class DimensionError(PolypdetError):
    """Array shapes are incompatible or below the minimum frame size."""


class ParameterError(PolypdetError):
    """A numeric parameter violates its documented constraint."""


class InputError(PolypdetError):
    """An input file could not be read or decoded."""


class ManifestError(PolypdetError):
    """A dataset manifest is malformed."""


class MetricError(PolypdetError):
    """A metric cannot be computed on the given data (e.g. single-class set)."""


class CalibrationError(PolypdetError):
    """The requested operating point cannot be reached."""


class DegenerateFeatureError(PolypdetError):
    """A feature's geometry degenerates (zero minor axis)."""
