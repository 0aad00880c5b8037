"""Exception types shared across the package."""


class HyperopError(Exception):
    """Base class for all package-specific errors."""


class NotHermitian(HyperopError):
    """An operand required to be Hermitian is not, within tolerance."""


class DecompositionFailure(HyperopError):
    """The eigensolver did not converge."""


class DomainViolation(HyperopError):
    """A spectrum leaves the admissible domain of a scalar function
    (e.g. a non-positive eigenvalue fed to ``inverse`` or ``log``)."""


class StepFailure(HyperopError):
    """A trajectory integrator could not meet its tolerance at the
    maximum allowed refinement."""


class QuadratureBudgetExceeded(HyperopError):
    """A nested quadrature would exceed the configured cost cap."""


class NotConserved(HyperopError):
    """A claimed constant of motion does not commute with the Hamiltonian."""


class NotOrthogonal(HyperopError):
    """Conserved quantities fail the thermal orthogonality requirement."""


class FitFailure(HyperopError):
    """Data passed to a pole fit is inconsistent with the fitted model."""


class LogFailure(HyperopError):
    """A matrix logarithm is undefined (non-positive spectrum)."""


class KernelSingularity(HyperopError):
    """The generator kernel x/(e^x - 1) is evaluated at a nonzero
    multiple of 2*pi*i, where it is singular."""


class DimensionCap(HyperopError):
    """A requested model exceeds the configured size limits."""


class ConfigError(HyperopError):
    """A scenario configuration failed schema validation."""


class TaskError(HyperopError):
    """A CLI task failed; wraps the underlying module error with context."""


class DivergenceWarning(UserWarning):
    """A truncated series shows growing terms (ratio >= 1)."""
