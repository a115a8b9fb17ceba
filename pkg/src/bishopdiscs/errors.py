"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration file or parameter set is invalid."""


class StructureError(ValueError):
    """An almost complex structure violates its contract (e.g. J**2 != -Id
    within the declared validity ball, or J_st + J(Z) is singular)."""


class ConvergenceError(RuntimeError):
    """An iterative solve failed; carries diagnostic data.

    Attributes
    ----------
    diagnostics : dict
        Iteration traces, measured contraction factors, last good state,
        whatever the failing solver could salvage.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
