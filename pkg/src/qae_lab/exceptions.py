"""Exception types raised by qae_lab.

Each leaf also derives from the builtin it specializes, so callers may catch
``ValueError`` and friends without importing this module.
"""


class QAELabError(Exception):
    """Base class for all qae_lab errors."""


class InvalidStateError(QAELabError, ValueError):
    """A state vector is malformed or not normalized."""


class QubitIndexError(QAELabError, IndexError):
    """A gate or query references a qubit outside the register."""


class CircuitSizeError(QAELabError, ValueError):
    """A circuit exceeds the simulator limits or does not match the state."""


class DistributionError(QAELabError, ValueError):
    """A distribution spec or discretized distribution is invalid."""


class ObjectiveError(QAELabError, ValueError):
    """An objective function cannot be built for the given register."""


class EstimationError(QAELabError, RuntimeError):
    """An estimator could not produce an estimate."""


class DegenerateTailError(QAELabError, ValueError):
    """The estimated tail probability is zero, so CVaR is undefined."""


class PlanError(QAELabError, ValueError):
    """An experiment plan file is missing or fails validation."""


class SchemaError(QAELabError, ValueError):
    """A results file does not have the expected columns."""
