"""Exception types shared across the package."""


class VolentError(Exception):
    """Base class for all package errors."""


class NonHyperbolic(VolentError):
    """Requested polygon angles do not admit a hyperbolic realization."""


class BadThickness(VolentError):
    """A thickness parameter is out of range (every q_i must be >= 1)."""


class ResourceLimit(VolentError):
    """Chamber enumeration exceeded its configured cap."""


class FrontierTooClose(VolentError):
    """BFS depth is insufficient for the requested ball radii."""


class WindowTooNarrow(VolentError):
    """Not enough growth-table rows inside the fit window."""


class VertexHit(VolentError):
    """A geodesic passed too close to a tessellation vertex."""


class NotIrreducible(VolentError):
    """Transition model is not strongly connected."""


class PowerIterationStalled(VolentError):
    """Spectral radius iteration failed to converge."""


class BracketFailed(VolentError):
    """Root bracketing for the entropy solve failed."""


class NotStronglyConnected(VolentError):
    """Directed edge graph of a metric graph is not strongly connected."""


class Degenerate(VolentError):
    """Input sits on a degenerate stratum (flagged, sometimes raised)."""
