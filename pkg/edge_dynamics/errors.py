"""Exceptions shared by every gossipdyn package."""


class GossipDynError(Exception):
    """Base class for all gossipdyn errors."""


class InvalidParamsError(GossipDynError, ValueError):
    """Edge-process parameters outside their allowed range."""


class DegenerateLawError(GossipDynError, ValueError):
    """Stationary law missing or concentrated on a single state."""


class ConvergenceError(GossipDynError, RuntimeError):
    """A truncated series did not reach the requested tolerance."""


class CouplingError(GossipDynError, ValueError):
    """A coupling precondition does not hold."""


class CoalescenceError(GossipDynError, RuntimeError):
    """Coupling from the past found no coalescence within its depth limit."""
