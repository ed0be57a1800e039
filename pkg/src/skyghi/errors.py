"""Exception types shared across the package."""


class SkyGhiError(Exception):
    """Base class for all skyghi errors."""


class UnreadableImage(SkyGhiError):
    """Image file is corrupt or not a decodable raster format."""


class MissingMetadata(SkyGhiError):
    """Capture metadata (exposure, ISO, f-number or timestamp) is unavailable."""


class ParseError(SkyGhiError):
    """A text input could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NonMonotonicTimestamps(SkyGhiError):
    """Timestamps are not strictly increasing."""


class InvalidWindow(SkyGhiError, ValueError):
    """Daylight window start is not before its end."""


class BelowHorizon(SkyGhiError, ValueError):
    """Ray points below the horizon (z < 0)."""


class OutsideImageCircle(SkyGhiError, ValueError):
    """Pixel or projected ray falls outside the fisheye image circle."""


class InvalidDay(SkyGhiError, ValueError):
    """Day-of-year outside [1, 366]."""


class SunBelowHorizon(SkyGhiError):
    """Solar zenith angle exceeds 90 degrees; no daytime sun position exists."""


class NoSunPixels(SkyGhiError):
    """No pixel inside the image circle exceeds the sun detection threshold."""


class SamplingExhausted(SkyGhiError):
    """Resampling budget exceeded while replacing off-image sample points."""


class EmptySampleSet(SkyGhiError, ValueError):
    """Luminance requested over an empty set of sample pixels."""


class InvalidZenith(SkyGhiError, ValueError):
    """Zenith angle outside the valid range for the operation."""


class InsufficientData(SkyGhiError):
    """Too few samples to fit the requested model."""


class DegenerateDesign(SkyGhiError):
    """Regression design matrix is rank deficient."""


class ZeroDenominator(SkyGhiError, ValueError):
    """Normalization factor undefined because sum(b_i^2) is zero."""


class MissingInput(SkyGhiError):
    """A benchmark model input required by the chosen model is absent."""


class SchemaMismatch(SkyGhiError):
    """Serialized model file does not match the expected schema."""


class LengthMismatch(SkyGhiError, ValueError):
    """Paired series have different lengths."""


class EmptyInput(SkyGhiError, ValueError):
    """Operation requires a non-empty input."""


class ConstantSeries(SkyGhiError, ValueError):
    """Rank correlation undefined for a constant series."""
