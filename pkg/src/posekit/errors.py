"""Exception hierarchy shared across the package."""


class PosekitError(Exception):
    """Base class for all toolkit errors."""


class JointNeverObserved(PosekitError):
    """A joint index has no observation in any frame, so it cannot be imputed."""

    def __init__(self, joint: int) -> None:
        super().__init__(f"joint {joint} is never observed in any frame")
        self.joint = joint


class MissingJoint(PosekitError):
    """A frame used in a distance computation still has absent joints."""


class EmptyCandidates(PosekitError):
    """A nearest-neighbor query was issued against a sequence with no frames."""


class EmptySequence(PosekitError):
    """A matching operation received a sequence with no frames."""


class ShiftTooLarge(PosekitError):
    """A translation shift magnitude meets or exceeds the image dimension."""


class DimensionMismatch(PosekitError):
    """Two rasters that must share dimensions do not."""


class SchemaError(PosekitError):
    """A document violates its schema.  Carries the path of the bad element."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


class ConfigError(SchemaError):
    """A pipeline config is malformed or carries unknown keys."""
