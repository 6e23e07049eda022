"""Exception types shared across the package."""


class SingularChannelError(RuntimeError):
    """Channel matrix is (numerically) rank deficient; caller should resample."""


class ReductionError(RuntimeError):
    """Lattice reduction failed to converge or lost exactness."""


class CapacityError(RuntimeError):
    """Problem does not fit the simulated hardware graph."""


class BudgetError(RuntimeError):
    """Problem exceeds an enumeration/budget limit."""


class EmbeddingError(RuntimeError):
    """Embedding is structurally invalid for the requested problem."""


class ConfigError(ValueError):
    """Experiment configuration is invalid; message carries field diagnostics."""
