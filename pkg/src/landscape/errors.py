"""Exception types shared across the package."""


class LandscapeError(Exception):
    """Base class for all package-specific failures."""


class RankDeficient(LandscapeError):
    """Linear system matrix lost row rank at the working tolerance."""


class DegenerateInput(LandscapeError):
    """Matrix handed to a null-space routine is not in generic position."""


class ShapeMismatch(LandscapeError):
    """Operands have incompatible dimensions."""


class InstanceTooLarge(LandscapeError):
    """Exhaustive oracle asked to enumerate more subsets than its cap allows."""


class DegenerateData(LandscapeError):
    """Dataset sits on a measure-zero configuration the construction cannot use."""


class BadLeak(LandscapeError):
    """Leak parameter value makes the unit linear (rho = 1)."""


class TargetTooSmall(LandscapeError):
    """Requested hidden width is below the constructed width."""


class ZeroVector(LandscapeError):
    """A vector required to be nonzero has zero norm."""


class ZeroColumn(LandscapeError):
    """A matrix column required to be nonzero has zero norm."""


class DomainError(LandscapeError):
    """Argument outside the mathematical domain of the evaluator."""


class NonFinite(LandscapeError):
    """Training loss became NaN or infinite."""

    def __init__(self, epoch, message=None):
        self.epoch = epoch
        super().__init__(message or f"loss became non-finite at epoch {epoch}")


class DatasetFormatError(LandscapeError):
    """Dataset file violates the CSV format contract."""


class LabelDomainError(LandscapeError):
    """Dataset label outside {0, 1}."""


class ConfigError(LandscapeError):
    """Run configuration is missing or carries unknown/invalid keys."""


class UsageError(LandscapeError):
    """Command line invocation error."""
