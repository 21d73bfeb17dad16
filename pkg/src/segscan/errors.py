"""Exception hierarchy shared by every module."""


class SegscanError(ValueError):
    """Base class for all errors raised by segscan."""


class InvalidInput(SegscanError):
    pass


class InvalidSegment(SegscanError):
    pass


class DegenerateScale(SegscanError):
    """Noise-scale estimate is zero, so nothing can be standardized by it."""


class DegenerateTemplate(SegscanError):
    """Template has zero energy on the sampling grid."""


class InvalidPlan(SegscanError):
    pass


class ConfigError(SegscanError):
    pass


class InvalidSpec(SegscanError):
    pass


class BisectionError(SegscanError):
    """Power bisection could not bracket the 50% point."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
