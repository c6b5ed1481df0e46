class PivotSimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(PivotSimError):
    """Configuration could not be read or failed validation."""


class InvalidScenarioError(ConfigError):
    """A scenario cannot be constructed from the given names or values."""


class GeometryError(PivotSimError):
    """Box dimensions are invalid or not graspable by the gripper."""


class StaticsError(PivotSimError):
    """Box commanded below the surface beyond the penetration bound."""


class GraspError(PivotSimError):
    """Gripper closed fully without reaching the requested grip force."""


class ExportError(PivotSimError):
    """Writing results failed."""

    def __init__(self, path, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")
