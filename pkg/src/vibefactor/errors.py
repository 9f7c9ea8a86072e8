"""Exception types raised by vibefactor."""


class VibefactorError(Exception):
    """Base class for all package errors."""


class InvalidIndex(VibefactorError, IndexError):
    pass


class ShapeError(VibefactorError, ValueError):
    pass


class ZeroReferenceError(VibefactorError, ZeroDivisionError):
    """Relative error requested against a tensor with zero norm."""


class SizeGuardExceeded(VibefactorError):
    """A dense representation or term enumeration would exceed its guard."""


class RankSearchExhausted(VibefactorError):
    """Incremental CP rank search hit the rank cap without meeting the target.

    The best factors found are kept on ``best`` and the tensor identity, when
    known, on ``tensor_id``.
    """

    def __init__(self, message, best=None, best_error=None, tensor_id=None):
        super().__init__(message)
        self.best = best
        self.best_error = best_error
        self.tensor_id = tensor_id


class EmptyOperator(VibefactorError, ValueError):
    pass


class InvalidBudget(VibefactorError, ValueError):
    pass


class NoTensorsToDecompose(VibefactorError, ValueError):
    pass


class ModelFormatError(VibefactorError, ValueError):
    """Malformed tensor, factor or model file."""
