"""Exception types raised across the package."""


class OstrovskyError(Exception):
    """Base class for all errors raised by ostrovsky_lab."""


class InvalidGrid(OstrovskyError, ValueError):
    pass


class NonZeroMean(OstrovskyError, ValueError):
    pass


class InvalidProfile(OstrovskyError, ValueError):
    pass


class UnderResolved(OstrovskyError, ValueError):
    """Initial data carries too much energy in the top third of the spectrum."""


class BlowUp(OstrovskyError, FloatingPointError):
    """Non-finite values or sup norm above the guard during time stepping."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class DegenerateBound(OstrovskyError, ValueError):
    pass


class InsufficientSampling(OstrovskyError, ValueError):
    pass


class IncompatibleWindows(OstrovskyError, ValueError):
    pass


class MissingData(OstrovskyError, ValueError):
    pass


class ConfigError(OstrovskyError, ValueError):
    pass
