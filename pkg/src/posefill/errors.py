"""Exception types shared across the package."""


class PoseFillError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(PoseFillError, ValueError):
    """An array or vector has the wrong length or dimensions."""


class ConfigError(PoseFillError, ValueError):
    """A rate, count, or option is outside its valid range."""


class InvalidCoordinateError(PoseFillError, ValueError):
    """A coordinate that must be finite is NaN or infinite."""


class DegenerateReferenceError(PoseFillError, ValueError):
    """The two reference keypoints coincide, so no rotation angle exists."""


class UnboundedAngleError(PoseFillError, ValueError):
    """The reference separation is too small for a meaningful angle error bound."""


class NoScaleError(PoseFillError, ValueError):
    """Normalization is impossible: no observed entries, or a degenerate scale."""


class PartUnanchoredError(PoseFillError, ValueError):
    """A part with missing keypoints has no observed keypoint to anchor its transform."""

    def __init__(self, parts):
        self.parts = tuple(parts)
        super().__init__(f"part(s) without any observed keypoint: {', '.join(self.parts)}")


class DataError(PoseFillError, ValueError):
    """Input data violates a precondition (e.g. incomplete poses in a training set)."""


class NumericError(PoseFillError, ArithmeticError):
    """A computation produced or received a non-finite value."""


class DivergenceError(PoseFillError, ArithmeticError):
    """Training produced a non-finite loss."""

    def __init__(self, part, epoch, message="non-finite loss"):
        self.part = part
        self.epoch = epoch
        super().__init__(f"{message} while training {part} at epoch {epoch}")


class CacheMismatchError(PoseFillError, ValueError):
    """A backward pass was given a cache from a different forward call or parameter state."""


class CheckpointError(PoseFillError, ValueError):
    """A checkpoint file cannot be used."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint format version is not supported."""


class CheckpointShapeError(CheckpointError):
    """Checkpoint arrays do not match the declared architecture."""


class CheckpointFormatError(CheckpointError):
    """Checkpoint document is malformed or truncated."""


class ParseError(PoseFillError, ValueError):
    """An input file does not match its documented format."""


class InsufficientDataError(PoseFillError, ValueError):
    """Too few observed entries for an interpolation method."""


class UndefinedMetricError(PoseFillError, ValueError):
    """A metric has an empty denominator (e.g. RMSE with zero generated entries)."""
