class PHSError(Exception):
    pass


class InvariantError(PHSError, ValueError):
    """A structured type was given values that break its invariant.

    ``code`` names the invariant (``skew``, ``symmetric``, ``psd``, ``spd``,
    ``grid``, ``range``, ``dimension``) so callers can report it.
    """

    code = "invariant"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class DimensionMismatchError(InvariantError):
    code = "dimension"


class DivergenceError(PHSError, ArithmeticError):
    def __init__(self, step: int, point=None):
        self.step = step
        self.point = point
        super().__init__(f"Integration produced non-finite state at step {step}.")


class SingularStepError(PHSError):
    pass


class UnsupportedDirectionError(PHSError, ValueError):
    pass


class LineSearchError(PHSError):
    def __init__(self, sigma: float, halvings: int):
        self.sigma = sigma
        self.halvings = halvings
        super().__init__(
            f"Armijo search found no admissible step after {halvings} halvings "
            f"(last sigma = {sigma:.3e})."
        )


class MalformedFileError(PHSError):
    pass
