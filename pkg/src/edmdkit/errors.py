"""Exception and warning types shared across the package."""


class EdmdkitError(Exception):
    """Base class for edmdkit errors."""


class RankDeficiencyError(EdmdkitError):
    """A matrix that the algorithm requires to be invertible is numerically
    rank deficient at the documented relative cutoff.

    Carries a condition-number estimate so callers can report how far the
    data is from satisfying the invertibility hypothesis.
    """

    def __init__(self, what, condition, cutoff):
        self.what = what
        self.condition = condition
        self.cutoff = cutoff
        super().__init__(
            f"{what} is numerically rank deficient "
            f"(condition estimate {condition:.3e}, relative cutoff {cutoff:.3e})"
        )


class EigensolverError(EdmdkitError):
    """The dense eigensolver failed to converge."""

    def __init__(self, message, condition=None):
        self.condition = condition
        if condition is not None:
            message = f"{message} (matrix condition estimate {condition:.3e})"
        super().__init__(message)


class DomainEscapeError(EdmdkitError):
    """A quadrature node left the domain under the map, making the
    integrals of the analytic construction meaningless."""


class ConfigError(EdmdkitError):
    """Invalid experiment configuration."""


class DomainEscapeWarning(UserWarning):
    """States left the declared domain during iteration; reported, not fatal."""


class QuadratureSaturationWarning(UserWarning):
    """Order escalation hit its node cap before two successive orders agreed."""
