"""Exception types shared across the package."""


class PhysfuseError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PhysfuseError):
    """Invalid construction arguments or missing required inputs."""


class EmptyLevelSet(PhysfuseError):
    """A signed-distance grid contains no zero crossing."""


class DegenerateHull(PhysfuseError):
    """Support samples are coplanar or collapsed; no 3D hull exists."""


class NumericalError(PhysfuseError):
    """Non-finite values encountered during optimization or simulation.

    Carries an optional ``snapshot`` dict with diagnostic state (epoch,
    parameters, loss history) captured at the point of failure.
    """

    def __init__(self, message, snapshot=None):
        super().__init__(message)
        self.snapshot = snapshot or {}
