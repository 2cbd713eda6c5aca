"""Exception hierarchy shared by the solver, metrics and CLI."""


class RectificationError(Exception):
    """Base class for every failure raised by this package."""


class InsufficientDataError(RectificationError, ValueError):
    """Too few correspondences for the requested estimate."""


class DegenerateConfigurationError(RectificationError):
    """The geometry does not determine a unique, finite answer."""


class NoModelError(DegenerateConfigurationError):
    """Every RANSAC candidate fit was degenerate."""


class DistortionUndefinedError(DegenerateConfigurationError):
    """The shearing transform cannot be computed for this alignment."""


class ProjectionError(RectificationError, ValueError):
    """A 3D point lies behind (or on) the image plane."""


class GenerationError(RectificationError):
    """The synthetic generator ran out of retries."""


class ImageFormatError(RectificationError, OSError):
    """An image file is unreadable or uses an unsupported format."""
