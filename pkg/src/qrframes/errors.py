class QRFError(Exception):
    """Base class for errors raised by qrframes."""


class GroupSpecError(QRFError, ValueError):
    """Malformed group specification or group file."""


class GroupAxiomError(QRFError, ValueError):
    """A Cayley table (or decomposition) violates the group axioms."""


class FrameError(QRFError, ValueError):
    """A frame change was requested that the state cannot support."""


class ModelError(QRFError, ValueError):
    """Incompatible or invalid system models."""


class DimensionError(QRFError, ValueError):
    """A dense construction would exceed the dimension cap."""


class ScenarioError(QRFError, ValueError):
    """A scenario file failed to parse or validate."""
