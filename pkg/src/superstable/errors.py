"""Exception hierarchy shared by the numeric and symbolic layers."""


class SuperstableError(Exception):
    """Base class for all errors raised by this package."""


class SignUndecidable(SuperstableError):
    """An orbit point could not be separated from zero."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"sign of xi_{index} is undecidable at maximum precision")


class PrecisionExhausted(SuperstableError):
    """The precision ladder hit its cap without deciding a sign."""


class WindowTooCoarse(SuperstableError):
    """Roots inside a grid cell could not be isolated."""


class DominanceViolation(SuperstableError):
    """A relation lost its monic-dominant coefficient."""


class DegreeBlowup(SuperstableError):
    """An intermediate polynomial exceeded the configured term cap."""
