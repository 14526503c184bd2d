"""Exception hierarchy shared across the package."""


class WaveregError(Exception):
    """Base class for all errors raised by wavereg."""


class ParameterError(WaveregError, ValueError):
    pass


class DimensionError(WaveregError, ValueError):
    pass


class BandLimitError(WaveregError, ValueError):
    """A spectral band is too small for the requested operation."""


class ResolutionError(WaveregError, ValueError):
    """A quadrature or sampling grid cannot resolve the integrand."""


class StabilityError(WaveregError, ValueError):
    """Time step violates the CFL condition of the leapfrog scheme."""


class DegenerateInputError(WaveregError, ValueError):
    pass


class InsufficientDataError(WaveregError, ValueError):
    pass


class UnknownDistributionError(WaveregError, KeyError):
    pass


class ConfigError(WaveregError, ValueError):
    pass
