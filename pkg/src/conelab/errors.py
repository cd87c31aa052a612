"""Exception types raised by conelab."""


class ConeLabError(ValueError):
    """Base class for invalid geometric input."""


class InvalidConeError(ConeLabError):
    """Cone data does not describe a closed pointed full-dimensional cone."""


class NotInteriorError(ConeLabError):
    """A point required to lie in the interior of a cone does not."""


class UnboundedSectionError(ConeLabError):
    """Hyperplane normal is not strictly inside the dual cone."""


class SearchBudgetExhausted(RuntimeError):
    """The centroid-section search ran out of restarts.

    The best residual reached is kept on ``best_residual`` and the
    best section found (possibly ``None``) on ``best_section``.
    """

    def __init__(self, message, best_residual, best_section=None):
        super().__init__(message)
        self.best_residual = best_residual
        self.best_section = best_section
