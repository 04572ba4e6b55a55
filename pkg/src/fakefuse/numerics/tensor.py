"""Dense float64 tensors with reverse-mode autodiff on an explicit tape.

Values are immutable once created; gradients accumulate into ``.grad``
during :func:`backward`. Ops append records to a process-wide tape in
execution order, so the record list is already topologically sorted and a
single reverse sweep implements backprop. Recording is thread-local, and
gradient-producing sections must hold :data:`GRAD_LOCK` when the process
runs concurrent inference (the tape is single-writer).
"""

from __future__ import annotations

import contextlib
import threading

import numpy as np

from ..errors import ContractError


class Tensor:
    """N-d float64 value, tracked for gradients when ``requires_grad`` is set."""

    __slots__ = ("data", "grad", "requires_grad")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor values must be finite")
        self.data = arr
        self.grad = None
        self.requires_grad = bool(requires_grad)

    @classmethod
    def _wrap(cls, arr: np.ndarray, requires_grad: bool) -> "Tensor":
        # internal fast path for op outputs: skips the finiteness scan
        out = cls.__new__(cls)
        out.data = arr
        out.grad = None
        out.requires_grad = requires_grad
        return out

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(()))

    def clear_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = g.copy() if isinstance(g, np.ndarray) else np.asarray(g)
        else:
            self.grad = self.grad + g

    def __repr__(self) -> str:
        return f"Tensor(shape={tuple(self.shape)}, requires_grad={self.requires_grad})"

    # light operator sugar; the op functions live in numerics.ops
    def __add__(self, other):
        from . import ops

        return ops.add(self, other)

    def __mul__(self, other):
        from . import ops

        return ops.mul(self, other)

    def __matmul__(self, other):
        from . import ops

        return ops.matmul(self, other)


def as_tensor(x) -> Tensor:
    """Wrap arrays/scalars as constant tensors; pass tensors through."""
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=np.float64))


class Tape:
    """Execution-ordered op records; the reverse sweep is backprop.

    Each record is (output tensor, parent tensors, backward rule). Inputs
    are always recorded before their consumers, so reverse iteration visits
    every node exactly once.
    """

    def __init__(self):
        self._records: list[tuple[Tensor, tuple[Tensor, ...], object]] = []

    def record(self, out: Tensor, parents, backward) -> None:
        self._records.append((out, tuple(parents), backward))

    def __len__(self) -> int:
        return len(self._records)

    def clear(self) -> None:
        self._records.clear()

    def backward(self, root: Tensor) -> None:
        if root.size != 1:
            raise ContractError("backward root must be a scalar")
        root.accumulate_grad(np.ones_like(root.data))
        for out, parents, rule in reversed(self._records):
            if out.grad is None:
                continue  # branch did not contribute to the root
            rule(out.grad)
        self.clear()


_default_tape = Tape()

# single-writer: hold this around forward/backward sections that need grads
# while other threads may be running inference
GRAD_LOCK = threading.Lock()

_state = threading.local()


def grad_enabled() -> bool:
    return getattr(_state, "enabled", True)


@contextlib.contextmanager
def no_grad():
    """Disable tape recording in the current thread."""
    prev = grad_enabled()
    _state.enabled = False
    try:
        yield
    finally:
        _state.enabled = prev


def default_tape() -> Tape:
    return _default_tape


def record(out: Tensor, parents, backward, tape: Tape | None = None) -> None:
    """Append an op record if recording is active and a parent needs grads."""
    if not out.requires_grad:
        return
    (tape or _default_tape).record(out, parents, backward)


def tracks_grad(*parents) -> bool:
    return grad_enabled() and any(p.requires_grad for p in parents)


def backward(loss: Tensor, tape: Tape | None = None) -> None:
    """Backpropagate from a scalar loss; consumes (clears) the tape."""
    (tape or _default_tape).backward(loss)
