"""Exception types shared across the package."""


class SonataError(Exception):
    """Base class for all package-specific errors."""


class NotConnected(SonataError):
    """Random graph sampling exhausted its retry budget without connectivity."""


class DegenerateMixing(SonataError):
    """Mixing matrix has no contraction left to boost."""


class GridTooCoarse(SonataError):
    """Brute-force grid minimizer landed on the boundary of its search window."""


class BadHyper(SonataError):
    """Hyperparameter outside its admissible range."""


class NotSmooth(SonataError):
    """Requested objective is not L-smooth on the region of interest."""


class InfeasibleInit(SonataError):
    """Initial point outside the domain of the nonsmooth term."""


class NumericalBlowup(SonataError):
    """Non-finite value encountered during iteration."""


class NoProgress(SonataError):
    """Stopping quantity stagnated above tolerance for too long."""


class MixingTooWeak(SonataError):
    """Network mixing too slow for the tuning rule; boost the gossip matrix first."""


class InvalidRegime(SonataError):
    """Descent margins are non-positive for the supplied parameters."""


class RegimeNotApplicable(SonataError):
    """Requested prediction only exists for a different exponent range."""


class ExponentUnbounded(SonataError):
    """Sublinear exponent diverges for exponents at or below one half."""


class WindowTooSmall(SonataError):
    """Too few trace points left after burn-in to fit a rate."""


class EmptyLevelBand(SonataError):
    """No sampled point fell inside the requested level band."""


class NotConverged(SonataError):
    """Reference solver hit its iteration cap before reaching tolerance."""


class ConfigError(SonataError):
    """Malformed experiment configuration file."""
