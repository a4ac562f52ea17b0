# -*- coding: utf-8 -*-
"""
ca2n.numerics.tensor
~~~~~~~~~~~~~~~~~~~~

Dense tensors with define-by-run reverse-mode differentiation.

Every forward pass executed inside a :class:`Tape` is recorded in order;
:func:`backward` replays the record in reverse. Outside of a tape nothing
is recorded, which is what inference uses.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import contextlib
import logging
import threading

import attr
import numpy as np

from ..core.exceptions import TrainingDiverged, ValidationError

logger = logging.getLogger(__name__)

PRECISIONS = {"float32": np.float32, "float64": np.float64}

# process wide on purpose, gradient checking flips it for a whole suite
_precision = {"dtype": np.float32}
_local = threading.local()


def get_dtype():
    """Returns the numpy dtype new tensors are created with."""
    return _precision["dtype"]


def set_precision(name):
    """Switches the global precision, ``"float32"`` or ``"float64"``."""
    try:
        _precision["dtype"] = PRECISIONS[name]
    except KeyError:
        raise ValidationError(
            "precision",
            "unknown precision {!r}, expected one of {}".format(
                name, ", ".join(sorted(PRECISIONS))
            ),
        )


@contextlib.contextmanager
def precision(name):
    """Temporarily switches the global precision."""
    previous = _precision["dtype"]
    set_precision(name)
    try:
        yield
    finally:
        _precision["dtype"] = previous


class Tensor(object):
    """A dense n-dimensional array taking part in differentiation.

    The constructor copies ``data`` so tensors behave like values; no
    operation mutates the array of an existing tensor. Parameters are
    tensors created with ``trainable=True``.

    :param data: Anything :func:`numpy.array` accepts.
    :param trainable: Marks a parameter that accumulates gradients.
    :param name: Optional name, used in diagnostics.
    :param dtype: Overrides the current global precision.
    """

    __slots__ = ("data", "trainable", "requires_grad", "name")

    def __init__(self, data, trainable=False, name=None, dtype=None):
        self.data = np.array(data, dtype=dtype or get_dtype())
        self.trainable = bool(trainable)
        self.requires_grad = self.trainable
        self.name = name

    @classmethod
    def wrap(cls, data, requires_grad=False):
        """Wraps an array without copying it. Used for operation results."""
        tensor = cls.__new__(cls)
        tensor.data = data
        tensor.trainable = False
        tensor.requires_grad = requires_grad
        tensor.name = None
        return tensor

    @property
    def shape(self):
        return tuple(self.data.shape)

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return int(self.data.size)

    @property
    def dtype(self):
        return self.data.dtype

    def numpy(self):
        """Returns a copy of the underlying array."""
        return self.data.copy()

    def item(self):
        if self.data.size != 1:
            raise ValidationError(
                "tensor", "item() needs exactly one element, got shape {}".format(
                    self.shape
                )
            )
        return float(self.data.reshape(-1)[0])

    def detach(self):
        from .ops import detach

        return detach(self)

    def __len__(self):
        return self.shape[0]

    def __repr__(self):
        return "<Tensor shape={} dtype={}{}{}>".format(
            self.shape,
            self.dtype,
            " trainable" if self.trainable else "",
            " name={!r}".format(self.name) if self.name else "",
        )

    def __add__(self, other):
        from .ops import add

        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from .ops import sub

        return sub(self, other)

    def __rsub__(self, other):
        from .ops import sub

        return sub(other, self)

    def __mul__(self, other):
        from .ops import mul

        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        from .ops import div

        return div(self, other)

    def __rtruediv__(self, other):
        from .ops import div

        return div(other, self)

    def __neg__(self):
        from .ops import neg

        return neg(self)


@attr.s(slots=True, frozen=True)
class TapeEntry(object):
    """One executed operation."""

    op = attr.ib()
    inputs = attr.ib()
    output = attr.ib()
    backward = attr.ib(repr=False)


class Tape(object):
    """Ordered record of the operations executed while it is active.

    A tape is used as a context manager and may be re-entered to keep
    recording into it. It is confined to the thread that first entered
    it::

        with Tape() as tape:
            loss = model(x)
        grads = backward(loss, tape)
    """

    def __init__(self):
        self.entries = []
        self._owner = None

    def __enter__(self):
        ident = threading.get_ident()
        if self._owner is None:
            self._owner = ident
        elif self._owner != ident:
            raise ValidationError(
                "tape", "a tape can only be used by the thread that built it"
            )
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc_value, tb):
        _tape_stack().pop()
        return False

    def record(self, op, inputs, output, backward):
        self.entries.append(TapeEntry(op, inputs, output, backward))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def _tape_stack():
    stack = getattr(_local, "tapes", None)
    if stack is None:
        stack = _local.tapes = []
    return stack


def active_tape():
    """Returns the innermost tape of the calling thread, or ``None``."""
    stack = _tape_stack()
    return stack[-1] if stack else None


def emit(op, inputs, data, backward):
    """Wraps ``data`` as the result of ``op`` and records it on the active
    tape when any input requires a gradient.

    :param backward: Callable mapping the output gradient to a tuple of
        input gradients (``None`` for inputs without one).
    """
    tape = active_tape()
    recorded = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor.wrap(data, requires_grad=recorded)
    if recorded:
        tape.record(op, tuple(inputs), out, backward)
    return out


def backward(loss, tape, wrt=None):
    """Computes gradients of a scalar ``loss`` by replaying ``tape`` in
    reverse.

    :param loss: Scalar tensor produced while ``tape`` was active.
    :param tape: The :class:`Tape` that recorded the forward pass.
    :param wrt: Optional tensors (leaves or intermediates) to return
        gradients for. Defaults to every trainable leaf reached.
    :returns: ``dict`` mapping tensors to gradient arrays. Requested
        tensors the loss does not depend on get zeros.
    """
    if loss.size != 1:
        raise ValidationError(
            "loss", "expected a scalar loss, got shape {}".format(loss.shape)
        )

    keep = set(wrt or ())
    grads = {}
    leaves = []
    if loss.requires_grad:
        grads[loss] = np.ones_like(loss.data)

    for entry in reversed(tape.entries):
        if entry.output in keep:
            grad = grads.get(entry.output)
        else:
            grad = grads.pop(entry.output, None)
        if grad is None:
            continue

        input_grads = entry.backward(grad)
        for tensor, input_grad in zip(entry.inputs, input_grads):
            if input_grad is None or not tensor.requires_grad:
                continue
            if tensor in grads:
                grads[tensor] = grads[tensor] + input_grad
            else:
                grads[tensor] = input_grad
                if tensor.trainable:
                    leaves.append(tensor)

    targets = wrt if wrt is not None else leaves
    result = {}
    for tensor in targets:
        grad = grads.get(tensor)
        if grad is None:
            grad = np.zeros_like(tensor.data)
        elif not np.all(np.isfinite(grad)):
            raise TrainingDiverged(
                "non-finite gradient", term=tensor.name or repr(tensor)
            )
        result[tensor] = np.asarray(grad, dtype=tensor.dtype).reshape(tensor.shape)
    return result
