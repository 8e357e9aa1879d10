"""Exception types shared across the package."""


class GridMismatchError(ValueError):
    """Two fields (or a field and an operator) live on different grids."""


class AssumptionError(ValueError):
    """A structural hypothesis on the coefficients or potential is violated."""


class ConvergenceError(RuntimeError):
    """An iterative or quadrature procedure did not reach its tolerance."""


class ContractionError(ConvergenceError):
    """Picard iterates stopped contracting."""


class BlowupDetected(RuntimeError):
    """Raised by the splitting step when the exact nonlinear flow leaves the substep.

    ``time_to_blowup`` is the pointwise blow-up time measured from the start
    of the offending nonlinear substep.
    """

    def __init__(self, time_to_blowup: float, where: int):
        super().__init__(f"blow-up inside substep after {time_to_blowup:.3e} at index {where}")
        self.time_to_blowup = time_to_blowup
        self.where = where
