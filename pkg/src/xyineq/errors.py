"""Exception types shared by the engines and the command line."""


class ModelError(ValueError):
    """Invalid model data. ``path`` locates the offending field, e.g. ``couplings[2].subset``."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class BudgetError(RuntimeError):
    """Problem size exceeds what an exact engine is allowed to handle."""


class HypothesisError(ValueError):
    """Couplings violate the hypothesis an operation depends on."""


class NoCrossingError(ValueError):
    """Bound constants admit no crossing of the two thresholds."""


class QuadratureError(RuntimeError):
    """Quadrature did not reach the requested accuracy within the node budget."""
