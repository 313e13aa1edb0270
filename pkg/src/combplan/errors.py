class CombPlanError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(CombPlanError):
    """Invalid transmitter/scenario configuration (e.g. negative required gain)."""


class TopologyError(CombPlanError):
    """Malformed or inconsistent topology input."""


class SpectrumConflictError(CombPlanError):
    """Attempt to occupy or transition slots that are not in the expected state."""
