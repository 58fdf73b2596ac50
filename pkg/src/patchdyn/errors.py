"""Exception types raised by configuration and schedule validation."""


class ConfigError(ValueError):
    """Base class for all configuration / schedule validation failures."""


class StabilityViolation(ConfigError):
    """Explicit micro step exceeds the FTCS diffusion stability bound."""


class NonCommensurate(ConfigError):
    """A required ratio (tau/micro_dt or patch_width/micro_dx) is not close
    to an integer, so the micro grid cannot tile the patch or the timestep."""


class GeometryError(ConfigError):
    """Patch/domain geometry is inconsistent (overlapping teeth, bad extent)."""


class SingularSystem(ConfigError):
    """The interpolation system for patch boundary slopes is degenerate.
    Cannot happen on a uniform macro grid; raised defensively."""


class InvalidSplit(ConfigError):
    """A uniform schedule split is impossible (too many groups, no time budget)."""


class ArityMismatch(ConfigError):
    """Group counts and extrapolation spans of a custom schedule disagree."""


class NegativeSpan(ConfigError):
    """A custom schedule requested a negative extrapolation span."""


class BudgetMismatch(ConfigError):
    """Custom span fractions do not sum to one (the extrapolation budget)."""


class SpecDocumentError(ConfigError):
    """The experiment document handed to the CLI could not be parsed."""
