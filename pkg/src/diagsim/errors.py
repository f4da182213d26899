"""Shared exception types."""


class ShapeError(ValueError):
    """Operand dimensions are incompatible (non-square input, dim mismatch)."""


class DomainError(ValueError):
    """An index or offset lies outside the valid range for the matrix."""


class PlanError(ValueError):
    """A blocking plan request is malformed (bad cuts, bad group sizes)."""


class GridCapacityError(ValueError):
    """A job carries more segments than the configured grid can host."""


class SimulatorError(RuntimeError):
    """Internal simulator invariant violated (livelock, FIFO overwrite)."""


class ConvergenceError(RuntimeError):
    """Series truncation failed to reach the threshold within the term cap."""


class VerificationError(RuntimeError):
    """A cross-check against the independent oracle failed."""
