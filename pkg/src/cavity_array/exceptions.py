"""Exception types raised by the solvers."""


class CavityArrayError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(CavityArrayError, ValueError):
    """Invalid physical parameters or lattice specification."""


class NonPhysicalError(CavityArrayError):
    """Gain exceeds loss for some Bloch mode, so no steady state exists."""


class NoBracketError(CavityArrayError):
    """The steady-state residual shows no sign change on the physical interval."""


class DegenerateNormalizationError(CavityArrayError):
    """A correlation profile was requested for a vacuum state (n_a = 0)."""


class FitError(CavityArrayError):
    """The damped-oscillation fit did not converge."""


class DimensionError(CavityArrayError):
    """A truncated Hilbert space exceeds the configured size cap."""


class ConvergenceError(CavityArrayError):
    """An iterative or time-integration solve failed to settle."""


class ConfigError(CavityArrayError):
    """A sweep configuration file violates the schema."""
