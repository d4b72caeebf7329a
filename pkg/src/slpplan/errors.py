"""Exception types shared across the planner."""


class SlpplanError(Exception):
    """Base class for all planner errors."""


class ScenarioError(SlpplanError):
    """Scenario file failed to parse or violates an invariant."""


class ProjectionError(SlpplanError):
    """Global->road projection is ambiguous or out of range."""


class CorridorError(SlpplanError):
    """Corridor construction failed (gap narrower than the vehicle)."""


class SingularStateError(SlpplanError):
    """Vehicle state too close to the |e_psi| = 90 deg pole or 1 - kappa*e_y <= 0."""


class InitializationError(SlpplanError):
    """No collision-free piecewise-affine reference path exists."""


class SimplexBreakdown(SlpplanError):
    """Numerical breakdown in the LP solver (pivot below tolerance).

    Distinct from an infeasible LP: this signals that the solver could not
    certify any status.
    """


class ReportError(SlpplanError):
    """Report emission failed (empty result or I/O problem)."""
