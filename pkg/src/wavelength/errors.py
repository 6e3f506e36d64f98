"""Exception types shared across the package.

Everything raised on purpose derives from WavelengthError so callers can
catch domain failures without swallowing programming errors.
"""


class WavelengthError(Exception):
    """Base class for all domain errors."""


class AllZeroWeights(WavelengthError):
    """Every weight is zero and smoothing is disabled."""


class ZeroColumn(WavelengthError):
    """An utterance receives zero total mass and cannot be conditioned on."""


class DimensionMismatch(WavelengthError):
    """Matrix/vector shapes or supports do not line up."""


class InvalidUtterancePool(WavelengthError):
    """The utterance set cannot support the requested computation."""


class EmptySample(WavelengthError):
    """An empirical sample with no observations."""


class DegenerateVariance(WavelengthError):
    """Correlation is undefined because one side has zero variance."""


class LengthMismatch(WavelengthError):
    """Paired sequences have different lengths."""


class SchemaError(WavelengthError):
    """A data file failed validation.

    Carries the path and 1-based line number when they are known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = str(path) if path is not None else None
        self.line = line
        loc = ""
        if self.path is not None:
            loc = f"{self.path}:{line}: " if line is not None else f"{self.path}: "
        super().__init__(f"{loc}{message}")


class NoCandidates(WavelengthError):
    """Clue selection was asked to choose from an empty candidate list."""


class ParseStarvation(WavelengthError):
    """Too few model samples parsed to form a usable distribution."""


class EndpointError(WavelengthError):
    """The language-model endpoint failed after exhausting retries."""


class CacheCorruption(WavelengthError):
    """A cache record could not be decoded."""


class ThinkTimeViolation(WavelengthError):
    """A study response arrived before the minimum think time elapsed."""

    def __init__(self, elapsed_s, required_s):
        self.elapsed_s = float(elapsed_s)
        self.required_s = float(required_s)
        self.retry_after_s = max(0.0, self.required_s - self.elapsed_s)
        super().__init__(
            f"response after {self.elapsed_s:.1f}s, minimum think time is "
            f"{self.required_s:.0f}s"
        )


class SessionExhausted(WavelengthError):
    """A study session has no items left to serve."""
