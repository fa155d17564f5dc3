"""Exception types shared across the package."""


class ParameterDomainError(ValueError):
    """Parameters outside the admissible domain (e.g. delta at lambda=0)."""


class SingularDomainError(ValueError):
    """State outside the domain of a vector field (e.g. u <= -1)."""


class GridDomainError(ValueError):
    """A sampled grid does not satisfy the requirements of an operation."""


class IntegrationError(RuntimeError):
    """Integration failed; carries the last valid time and state."""

    def __init__(self, message, t=None, y=None):
        super().__init__(message)
        self.t = t
        self.y = y
