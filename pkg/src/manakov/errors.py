"""Exception hierarchy shared across the package.

Everything raised deliberately by this package derives from ManakovError so
callers can catch one base class.  The CLI maps subclasses onto exit codes.
"""


class ManakovError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ManakovError):
    """A configuration value is inconsistent or out of range."""


class NonDivisibleDomain(ConfigError):
    """The domain width 2a is not an integer multiple of the mesh size."""


class DegenerateGrid(ConfigError):
    """The grid has too few interior points to support the stencils."""


class InvalidRadius(ConfigError):
    """A truncation radius must be strictly positive."""


class BadFactor(ConfigError):
    """A coarsening factor must be a power of two dividing the path length."""


class IncompatibleTimelines(ConfigError):
    """Trajectory time points are not a subset of the reference time points."""


class BackendBoundaryMismatch(ConfigError):
    """Finite differences need a Dirichlet grid; the spectral backend needs
    a periodic one."""


class DegenerateFit(ConfigError):
    """A least-squares slope fit needs at least two distinct abscissae."""


class NumericalFailure(ManakovError):
    """Base class for failures detected while time stepping.

    Carries the step index at which the failure occurred once a driver has
    attached it (``step_index`` is None for failures raised outside a
    stepping loop).
    """

    step_index: "int | None" = None


class SingularPivot(NumericalFailure):
    """A 2x2 pivot block in the block-Thomas sweep is numerically singular."""


class NoConvergence(NumericalFailure):
    """A fixed-point iteration exhausted its iteration budget."""

    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"fixed point not converged after {iterations} iterations, "
            f"residual {residual:.3e}"
        )
        self.iterations = iterations
        self.residual = residual


class BlowUp(NumericalFailure):
    """A trajectory exceeded the blow-up threshold (or went non-finite)."""

    def __init__(self, step_index: int, h1_value: float):
        super().__init__(
            f"H1 norm {h1_value:.6g} beyond threshold at step {step_index}"
        )
        self.step_index = step_index
        self.h1_value = h1_value
