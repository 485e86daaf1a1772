"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A parameter violates its documented admissible range."""


class NumericalFailureError(RuntimeError):
    """An iterative numerical procedure failed to converge."""


class BlowupError(RuntimeError):
    """The field left the representable range in finite time.

    Carries the last time at which the field was confirmed finite.
    """

    def __init__(self, t_last_finite: float):
        super().__init__(f"non-finite field values after t = {t_last_finite:.6g}")
        self.t_last_finite = float(t_last_finite)


class OutOfTubeError(RuntimeError):
    """The state is too far from the multi-soliton family to decompose."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class IllConditionedError(RuntimeError):
    """Soliton centers are too close for a well-posed linear algebra step."""


class BracketingError(RuntimeError):
    """A bisection bracket does not straddle the sought transition."""


class FitWindowError(RuntimeError):
    """Not enough usable samples in the requested fit window."""
