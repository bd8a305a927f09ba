"""Exception types shared across the toolkit.

Every failure mode raised by the numerical modules derives from
:class:`PeriodicaError` so callers (and the CLI) can map them to exit codes:
configuration problems are :class:`ConfigError`, everything else counts as a
numerical failure.
"""


class PeriodicaError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(PeriodicaError):
    """Malformed or inconsistent configuration input."""


# -- medium --------------------------------------------------------------

class EllipticityViolation(PeriodicaError):
    """The metric is not uniformly positive on the validation sample."""


class NegativeAbsorption(PeriodicaError):
    """The absorption index takes negative values."""


class ZeroDamping(PeriodicaError):
    """The periodic absorption vanishes identically; the mean damping is zero."""


class DimensionMismatch(PeriodicaError):
    """Grid and medium dimensions disagree."""


# -- homogenize ----------------------------------------------------------

class NoConvergence(PeriodicaError):
    def __init__(self, iterations, residual):
        super().__init__(
            f"iterative solver stalled after {iterations} iterations "
            f"(relative residual {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


class SingularOperator(PeriodicaError):
    """The cell operator lost definiteness (unreachable for valid media)."""


class ResolutionMismatch(PeriodicaError):
    """Correctors tabulated at different cell resolutions."""


# -- bloch ---------------------------------------------------------------

class AliasingError(PeriodicaError):
    """Coefficient spectrum is not resolved at the requested cutoff."""


class EigensolverFailure(PeriodicaError):
    """Dense or iterative eigensolver did not produce usable pairs."""


class NearSingular(PeriodicaError):
    def __init__(self, z, condition):
        super().__init__(f"pencil nearly singular at z={z} (cond~{condition:.3e})")
        self.z = z
        self.condition = condition


class BandCrossing(PeriodicaError):
    """A second eigenvalue approached the tracked branch during continuation."""


class LostTracking(PeriodicaError):
    """Continuation lost the first branch (degenerate mean or jump detected)."""


class BandUnavailable(PeriodicaError):
    """Band data missing at quasi-momenta required by the propagator."""


# -- flow ----------------------------------------------------------------

class StepUnderflow(PeriodicaError):
    """Adaptive step halving exhausted without meeting the drift tolerance."""


class EmptyEnsemble(PeriodicaError):
    """No trajectories requested for the damping audit."""


# -- evolve --------------------------------------------------------------

class CFLViolation(PeriodicaError):
    """Requested time step exceeds the stability bound."""


class NonFiniteState(PeriodicaError):
    """Blow-up detector: the wave state left the range of floats."""


class GridIncompatibility(PeriodicaError):
    """Field shape does not match the torus grid layout."""


# -- analysis ------------------------------------------------------------

class GridMismatch(PeriodicaError):
    """Compared runs live on different grids."""


class InsufficientSamples(PeriodicaError):
    """Not enough quasi-momentum samples (or decades) for a meaningful fit."""


class NonPositiveValues(PeriodicaError):
    """Power-law fit requested on a series with non-positive entries."""


class WindowTooShort(PeriodicaError):
    """Fit window has too few snapshots or spans too little time."""


class ConstraintViolation(PeriodicaError):
    """Weight/decay parameters outside the admissible perturbation range."""
