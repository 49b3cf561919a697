"""Exception types raised by the library."""


class FBIndexError(Exception):
    """Base class for all library errors."""


class SpecError(FBIndexError, ValueError):
    """Invalid surface specification (e.g. Fraser-Sargent with k <= l)."""


class NonConvergence(FBIndexError):
    pass


class DomainError(FBIndexError, ValueError):
    """Evaluation outside the parameter domain |t| <= T."""


class ScalingError(FBIndexError):
    """Operation needs the boundary on the unit sphere."""


class DegenerateFrame(FBIndexError):
    pass


class NonConstant(FBIndexError):
    pass


class LabelError(FBIndexError, KeyError):
    pass


class ConfigError(FBIndexError, ValueError):
    pass


class EigenFailure(FBIndexError):
    pass


class NotApplicable(FBIndexError):
    """Claim check does not apply to the surface's ambient dimension."""
