# -*- coding: utf-8 -*-
"""
ca2n.numerics.ops
~~~~~~~~~~~~~~~~~

The differentiable operator set used by every network of the pipeline.

Each operator computes its forward result with numpy and hands a closure
computing the input gradients to :func:`ca2n.numerics.tensor.emit`.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from ..core.exceptions import ValidationError, require
from .tensor import Tensor, emit, get_dtype

logger = logging.getLogger(__name__)


def as_tensor(value, like=None):
    """Returns ``value`` as a tensor. Scalars and arrays are wrapped as
    constants with the dtype of ``like`` (or the global precision)."""
    if isinstance(value, Tensor):
        return value
    dtype = like.dtype if like is not None else get_dtype()
    return Tensor.wrap(np.asarray(value, dtype=dtype))


def detach(a):
    """Returns a constant sharing the values of ``a``."""
    return Tensor.wrap(a.data, requires_grad=False)


def _unbroadcast(grad, shape):
    """Sums ``grad`` down to ``shape`` after numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(
        i for i, size in enumerate(shape) if size == 1 and grad.shape[i] != 1
    )
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _pair(a, b, op):
    a = as_tensor(a, like=b if isinstance(b, Tensor) else None)
    b = as_tensor(b, like=a)
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ValidationError(
            op, "shape mismatch: {} vs {}".format(a.shape, b.shape)
        )
    return a, b


def _axes(axis, ndim):
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(sorted(ax % ndim for ax in axis))


# -- elementwise --------------------------------------------------------------


def add(a, b):
    a, b = _pair(a, b, "add")

    def backward(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(grad, b.shape)

    return emit("add", (a, b), a.data + b.data, backward)


def sub(a, b):
    a, b = _pair(a, b, "sub")

    def backward(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(-grad, b.shape)

    return emit("sub", (a, b), a.data - b.data, backward)


def mul(a, b):
    a, b = _pair(a, b, "mul")

    def backward(grad):
        return (
            _unbroadcast(grad * b.data, a.shape),
            _unbroadcast(grad * a.data, b.shape),
        )

    return emit("mul", (a, b), a.data * b.data, backward)


def div(a, b):
    a, b = _pair(a, b, "div")

    def backward(grad):
        return (
            _unbroadcast(grad / b.data, a.shape),
            _unbroadcast(-grad * a.data / (b.data * b.data), b.shape),
        )

    return emit("div", (a, b), a.data / b.data, backward)


def neg(a):
    return emit("neg", (a,), -a.data, lambda grad: (-grad,))


def absolute(a):
    """Elementwise absolute value, subgradient 0 at 0."""

    def backward(grad):
        return (grad * np.sign(a.data),)

    return emit("abs", (a,), np.abs(a.data), backward)


def square(a):
    return emit("square", (a,), a.data * a.data, lambda grad: (2 * grad * a.data,))


def sqrt(a):
    out = np.sqrt(a.data)

    def backward(grad):
        return (grad * 0.5 / out,)

    return emit("sqrt", (a,), out, backward)


def log(a):
    require(np.all(a.data > 0), "log", "input must be strictly positive")
    return emit("log", (a,), np.log(a.data), lambda grad: (grad / a.data,))


def clamp(a, lo, hi):
    """Clips ``a`` to ``[lo, hi]``. The gradient is 1 on the closed
    interval and 0 outside of it."""
    require(lo <= hi, "clamp", "lower bound {} exceeds upper bound {}", lo, hi)
    inside = (a.data >= lo) & (a.data <= hi)

    def backward(grad):
        return (grad * inside,)

    out = np.clip(a.data, lo, hi).astype(a.dtype, copy=False)
    return emit("clamp", (a,), out, backward)


def elementwise(a, b=None, kind="add", lo=None, hi=None):
    """Dispatches to the elementwise operator named by ``kind``."""
    if kind == "add":
        return add(a, b)
    if kind == "sub":
        return sub(a, b)
    if kind == "mul":
        return mul(a, b)
    if kind == "div":
        return div(a, b)
    if kind == "abs":
        return absolute(a)
    if kind == "clamp":
        return clamp(a, lo, hi)
    raise ValidationError("kind", "unknown elementwise kind {!r}".format(kind))


# -- activations --------------------------------------------------------------


def sigmoid(x):
    """Logistic function, kept strictly inside the open unit interval."""
    eps = np.finfo(x.dtype).eps
    out = np.clip(expit(x.data), eps, 1 - eps).astype(x.dtype, copy=False)

    def backward(grad):
        return (grad * out * (1 - out),)

    return emit("sigmoid", (x,), out, backward)


def relu(x):
    mask = x.data > 0

    def backward(grad):
        return (grad * mask,)

    return emit("relu", (x,), x.data * mask, backward)


def leaky_relu(x, alpha=0.2):
    slope = np.where(x.data > 0, 1.0, alpha).astype(x.dtype)

    def backward(grad):
        return (grad * slope,)

    return emit("leaky_relu", (x,), x.data * slope, backward)


def tanh(x):
    out = np.tanh(x.data)

    def backward(grad):
        return (grad * (1 - out * out),)

    return emit("tanh", (x,), out, backward)


def activation(x, kind, alpha=0.2):
    if kind == "sigmoid":
        return sigmoid(x)
    if kind == "relu":
        return relu(x)
    if kind == "leaky_relu":
        return leaky_relu(x, alpha)
    if kind == "tanh":
        return tanh(x)
    raise ValidationError("kind", "unknown activation {!r}".format(kind))


# -- reductions ---------------------------------------------------------------


def _reduce_sum(data, axes, keepdims, order_invariant):
    if not order_invariant:
        return np.asarray(data.sum(axis=axes, keepdims=keepdims))
    lead = data.ndim - len(axes)
    moved = np.moveaxis(data, axes, tuple(range(lead, data.ndim)))
    flat = moved.reshape(moved.shape[:lead] + (-1,))
    total = np.asarray(np.sort(flat, axis=-1).sum(axis=-1))
    if keepdims:
        total = np.expand_dims(total, axes)
    return total


def _expand_grad(grad, shape, axes, keepdims):
    if not keepdims:
        grad = np.expand_dims(grad, axes)
    return np.broadcast_to(grad, shape)


def sum(a, axis=None, keepdims=False, order_invariant=False):  # noqa: A001
    """Sums over ``axis``. With ``order_invariant`` the summands are
    sorted first, which makes the result independent of their order."""
    axes = _axes(axis, a.ndim)
    out = _reduce_sum(a.data, axes, keepdims, order_invariant)

    def backward(grad):
        return (_expand_grad(grad, a.shape, axes, keepdims),)

    return emit("sum", (a,), out, backward)


def mean(a, axis=None, keepdims=False, order_invariant=False):
    axes = _axes(axis, a.ndim)
    count = int(np.prod([a.shape[ax] for ax in axes]))
    out = np.asarray(
        _reduce_sum(a.data, axes, keepdims, order_invariant) / count, dtype=a.dtype
    )

    def backward(grad):
        return (_expand_grad(grad / count, a.shape, axes, keepdims),)

    return emit("mean", (a,), out, backward)


def reduce_mean(a):
    """Mean over all elements as a scalar tensor."""
    return mean(a)


def amax(a, axis=None, keepdims=False):
    """Maximum over ``axis``. The gradient flows to the first maximum."""
    axes = _axes(axis, a.ndim)
    lead = a.ndim - len(axes)
    moved = np.moveaxis(a.data, axes, tuple(range(lead, a.ndim)))
    flat = moved.reshape(moved.shape[:lead] + (-1,))
    index = flat.argmax(axis=-1)[..., None]
    out = np.take_along_axis(flat, index, axis=-1)[..., 0]
    if keepdims:
        out = np.expand_dims(out, axes)

    def backward(grad):
        if keepdims:
            grad = np.squeeze(grad, axis=axes)
        gflat = np.zeros_like(flat)
        np.put_along_axis(gflat, index, grad[..., None], axis=-1)
        gmoved = gflat.reshape(moved.shape)
        return (np.moveaxis(gmoved, tuple(range(lead, a.ndim)), axes),)

    return emit("amax", (a,), np.asarray(out), backward)


def l2_norm(a, axis=None, keepdims=False):
    """Euclidean norm over ``axis``, with subgradient 0 where it is 0."""
    axes = _axes(axis, a.ndim)
    out = np.sqrt(np.asarray((a.data * a.data).sum(axis=axes, keepdims=True)))

    def backward(grad):
        if not keepdims:
            grad = np.expand_dims(grad, axes)
        safe = np.where(out > 0, out, 1)
        return (np.where(out > 0, grad * a.data / safe, 0).astype(a.dtype),)

    result = out if keepdims else np.squeeze(out, axis=axes)
    return emit("l2_norm", (a,), np.asarray(result), backward)


# -- shape manipulation -------------------------------------------------------


def reshape(a, shape):
    shape = tuple(shape)
    try:
        out = a.data.reshape(shape)
    except ValueError:
        raise ValidationError(
            "reshape", "cannot reshape {} into {}".format(a.shape, shape)
        )
    return emit("reshape", (a,), out, lambda grad: (grad.reshape(a.shape),))


def flatten(a, start=1):
    return reshape(a, a.shape[:start] + (-1,))


def concat(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    require(len(tensors) > 0, "concat", "needs at least one tensor")
    ndim = tensors[0].ndim
    axis = axis % ndim
    for t in tensors[1:]:
        other = t.shape[:axis] + t.shape[axis + 1:]
        first = tensors[0].shape[:axis] + tensors[0].shape[axis + 1:]
        require(
            t.ndim == ndim and other == first,
            "concat",
            "shape mismatch along non-concatenated axes: {} vs {}",
            tensors[0].shape,
            t.shape,
        )
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(grad):
        return tuple(np.split(grad, bounds, axis=axis))

    out = np.concatenate([t.data for t in tensors], axis=axis)
    return emit("concat", tensors, out, backward)


def _check_region(shape, region, name):
    x, y, w, h = region
    require(
        w > 0 and h > 0, name, "region {} must have a positive extent", region
    )
    require(
        x >= 0 and y >= 0 and x + w <= shape[-1] and y + h <= shape[-2],
        name,
        "region {} lies outside of a {}x{} frame",
        region,
        shape[-1],
        shape[-2],
    )
    return (Ellipsis, slice(y, y + h), slice(x, x + w))


def crop(a, region):
    """Cuts the ``(x, y, w, h)`` region out of the last two axes."""
    index = _check_region(a.shape, region, "crop")

    def backward(grad):
        full = np.zeros_like(a.data)
        full[index] = grad
        return (full,)

    return emit("crop", (a,), a.data[index].copy(), backward)


def paste(target, patch, region):
    """Overwrites the ``(x, y, w, h)`` region of ``target`` with ``patch``."""
    index = _check_region(target.shape, region, "paste")
    expected = target.shape[:-2] + (region[3], region[2])
    require(
        patch.shape == expected,
        "paste",
        "patch shape {} does not match region shape {}",
        patch.shape,
        expected,
    )
    out = target.data.copy()
    out[index] = patch.data

    def backward(grad):
        outside = grad.copy()
        outside[index] = 0
        return outside, grad[index].copy()

    return emit("paste", (target, patch), out, backward)


# -- layers -------------------------------------------------------------------


def linear(x, weight, bias):
    """``out[n, j] = sum_i weight[j, i] * x[n, i] + bias[j]``"""
    require(
        x.ndim == 2 and weight.ndim == 2,
        "linear",
        "expected 2-d input and weight, got {} and {}",
        x.shape,
        weight.shape,
    )
    require(
        x.shape[1] == weight.shape[1],
        "linear",
        "input has {} features but weight expects {}",
        x.shape[1],
        weight.shape[1],
    )
    require(
        bias.shape == (weight.shape[0],),
        "linear",
        "bias shape {} does not match {} outputs",
        bias.shape,
        weight.shape[0],
    )

    def backward(grad):
        return grad @ weight.data, grad.T @ x.data, grad.sum(axis=0)

    out = x.data @ weight.data.T + bias.data
    return emit("linear", (x, weight, bias), out, backward)


def conv_output_size(size, kernel, stride, padding):
    return (size + 2 * padding - kernel) // stride + 1


def transpose_output_padding(target, size, kernel, stride, padding):
    """Returns the output padding a transposed convolution of an input of
    ``size`` needs to produce ``target``; it mirrors a convolution that
    mapped ``target`` down to ``size``."""
    return target - ((size - 1) * stride - 2 * padding + kernel)


def _check_conv(x, kernel, bias, stride, padding, op, channel_axis):
    require(
        x.ndim == 4 and kernel.ndim == 4,
        op,
        "expected 4-d input and kernel, got {} and {}",
        x.shape,
        kernel.shape,
    )
    require(stride >= 1, op, "stride must be positive, got {}", stride)
    require(padding >= 0, op, "padding must be non-negative, got {}", padding)
    require(
        x.shape[1] == kernel.shape[channel_axis],
        op,
        "input has {} channels but kernel {} expects {}",
        x.shape[1],
        kernel.shape,
        kernel.shape[channel_axis],
    )
    out_channels = kernel.shape[1 - channel_axis]
    require(
        bias.shape == (out_channels,),
        op,
        "bias shape {} does not match {} output channels",
        bias.shape,
        out_channels,
    )


def conv2d(x, kernel, bias, stride=1, padding=0):
    """2-d cross-correlation with zero padding.

    :param x: ``[N, C, H, W]`` input.
    :param kernel: ``[K, C, kh, kw]`` filters.
    :param bias: ``[K]`` bias.
    """
    _check_conv(x, kernel, bias, stride, padding, "conv2d", channel_axis=1)
    n, c, h, w = x.shape
    k, _, kh, kw = kernel.shape
    require(
        kh <= h + 2 * padding and kw <= w + 2 * padding,
        "conv2d",
        "kernel {}x{} exceeds padded input {}x{}",
        kh,
        kw,
        h + 2 * padding,
        w + 2 * padding,
    )
    ho = conv_output_size(h, kh, stride, padding)
    wo = conv_output_size(w, kw, stride, padding)

    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    out = np.tensordot(windows, kernel.data, axes=([1, 4, 5], [1, 2, 3]))
    out = np.ascontiguousarray(out.transpose(0, 3, 1, 2)) + bias.data[:, None, None]

    def backward(grad):
        dxp = np.zeros_like(xp)
        for i in range(kh):
            for j in range(kw):
                contrib = np.tensordot(grad, kernel.data[:, :, i, j], axes=([1], [0]))
                dxp[
                    :,
                    :,
                    i:i + stride * (ho - 1) + 1:stride,
                    j:j + stride * (wo - 1) + 1:stride,
                ] += contrib.transpose(0, 3, 1, 2)
        dx = dxp[:, :, padding:padding + h, padding:padding + w]
        dkernel = np.tensordot(grad, windows, axes=([0, 2, 3], [0, 2, 3]))
        return np.ascontiguousarray(dx), dkernel, grad.sum(axis=(0, 2, 3))

    return emit("conv2d", (x, kernel, bias), out, backward)


def conv2d_transpose(x, kernel, bias, stride=1, padding=0, output_padding=0):
    """Transposed 2-d convolution, the adjoint of :func:`conv2d`.

    :param x: ``[N, C, H, W]`` input.
    :param kernel: ``[C, K, kh, kw]`` filters.
    :param bias: ``[K]`` bias.
    :param output_padding: Extra rows and columns (``0 <= p < stride``)
        selecting among the input sizes a strided convolution maps onto
        the same output size. An int or a ``(rows, columns)`` pair.
    """
    _check_conv(x, kernel, bias, stride, padding, "conv2d_transpose", channel_axis=0)
    n, c, h, w = x.shape
    _, k, kh, kw = kernel.shape
    if isinstance(output_padding, int):
        output_padding = (output_padding, output_padding)
    pad_h, pad_w = output_padding
    require(
        0 <= pad_h < stride and 0 <= pad_w < stride,
        "conv2d_transpose",
        "output padding {} must be smaller than stride {}",
        output_padding,
        stride,
    )
    ho = (h - 1) * stride - 2 * padding + kh + pad_h
    wo = (w - 1) * stride - 2 * padding + kw + pad_w
    require(
        ho >= 1 and wo >= 1,
        "conv2d_transpose",
        "inconsistent geometry: input {}x{}, kernel {}x{}, stride {}, padding {}",
        h,
        w,
        kh,
        kw,
        stride,
        padding,
    )

    full_shape = (
        n,
        k,
        (h - 1) * stride + kh + pad_h,
        (w - 1) * stride + kw + pad_w,
    )
    full = np.zeros(full_shape, dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            contrib = np.tensordot(x.data, kernel.data[:, :, i, j], axes=([1], [0]))
            full[
                :,
                :,
                i:i + stride * (h - 1) + 1:stride,
                j:j + stride * (w - 1) + 1:stride,
            ] += contrib.transpose(0, 3, 1, 2)
    out = full[:, :, padding:padding + ho, padding:padding + wo]
    out = np.ascontiguousarray(out) + bias.data[:, None, None]

    def backward(grad):
        gfull = np.zeros(full_shape, dtype=grad.dtype)
        gfull[:, :, padding:padding + ho, padding:padding + wo] = grad
        dx = np.zeros_like(x.data)
        dkernel = np.zeros_like(kernel.data)
        for i in range(kh):
            for j in range(kw):
                window = gfull[
                    :,
                    :,
                    i:i + stride * (h - 1) + 1:stride,
                    j:j + stride * (w - 1) + 1:stride,
                ]
                dx += np.tensordot(
                    window, kernel.data[:, :, i, j], axes=([1], [1])
                ).transpose(0, 3, 1, 2)
                dkernel[:, :, i, j] = np.tensordot(
                    x.data, window, axes=([0, 2, 3], [0, 2, 3])
                )
        return dx, dkernel, grad.sum(axis=(0, 2, 3))

    return emit("conv2d_transpose", (x, kernel, bias), out, backward)


def pool(x, kind, window, stride=None):
    """Max or average pooling over square windows."""
    stride = stride or window
    require(x.ndim == 4, "pool", "expected 4-d input, got {}", x.shape)
    require(window >= 1 and stride >= 1, "pool", "window and stride must be positive")
    n, c, h, w = x.shape
    require(
        window <= h and window <= w,
        "pool",
        "window {} larger than input {}x{}",
        window,
        h,
        w,
    )
    if kind not in ("max", "avg"):
        raise ValidationError("kind", "unknown pooling kind {!r}".format(kind))

    ho = (h - window) // stride + 1
    wo = (w - window) // stride + 1
    windows = sliding_window_view(x.data, (window, window), axis=(2, 3))
    flat = windows[:, :, ::stride, ::stride].reshape(n, c, ho, wo, window * window)
    if kind == "max":
        index = flat.argmax(axis=-1)
        out = np.take_along_axis(flat, index[..., None], axis=-1)[..., 0]
    else:
        out = flat.mean(axis=-1).astype(x.dtype, copy=False)

    def backward(grad):
        dx = np.zeros_like(x.data)
        for q in range(window * window):
            i, j = divmod(q, window)
            if kind == "max":
                contrib = grad * (index == q)
            else:
                contrib = grad / (window * window)
            dx[
                :,
                :,
                i:i + stride * (ho - 1) + 1:stride,
                j:j + stride * (wo - 1) + 1:stride,
            ] += contrib
        return (dx,)

    return emit("pool_" + kind, (x,), np.ascontiguousarray(out), backward)


def global_pool(x, kind):
    """Reduces all spatial positions to ``[N, C, 1, 1]``. Averages are
    summed in sorted order."""
    require(x.ndim == 4, "global_pool", "expected 4-d input, got {}", x.shape)
    if kind == "max":
        return amax(x, axis=(2, 3), keepdims=True)
    if kind == "avg":
        return mean(x, axis=(2, 3), keepdims=True, order_invariant=True)
    raise ValidationError("kind", "unknown pooling kind {!r}".format(kind))
