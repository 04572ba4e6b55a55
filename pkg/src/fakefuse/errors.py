"""Exception taxonomy shared across the package."""


class FakefuseError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(FakefuseError, ValueError):
    """Operand shapes are incompatible with the requested operation."""


class ParameterError(FakefuseError, ValueError):
    """A parameter value is outside its documented domain."""


class RangeError(FakefuseError, ValueError):
    """An index or coordinate lies outside its valid range."""


class ContractError(FakefuseError, RuntimeError):
    """A caller violated an operation's contract (e.g. non-scalar backward root)."""


class StateError(FakefuseError, RuntimeError):
    """Operation requires state that has not been established (e.g. untrained model)."""


class PoisonedGradientError(FakefuseError, FloatingPointError):
    """Non-finite gradients reached the optimizer; the step was aborted."""


class TrainingFailure(FakefuseError, RuntimeError):
    """Training diverged; carries the epoch at which it happened."""

    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch


class StratificationError(FakefuseError, ValueError):
    """A class has too few samples for a stratified split."""


class AlignmentError(FakefuseError, ValueError):
    """Landmark geometry is degenerate (coincident or collinear points)."""


class DecodeError(FakefuseError, IOError):
    """An image or clip source could not be decoded."""


class EmptyClipError(FakefuseError, ValueError):
    """A sampling window produced no frames."""


class CorpusLoadError(FakefuseError, ValueError):
    """External corpus layout is malformed; lists the offending paths."""

    def __init__(self, message: str, paths=()):
        super().__init__(message)
        self.paths = list(paths)


class LeakageError(FakefuseError, ValueError):
    """An evaluation family was present in the training corpus."""


class QueueFullError(FakefuseError, RuntimeError):
    """The service work queue is at capacity; retry after the given seconds."""

    def __init__(self, message: str, retry_after_s: float = 1.0):
        super().__init__(message)
        self.retry_after_s = retry_after_s


class NotFoundError(FakefuseError, KeyError):
    """A referenced record does not exist."""
