# -*- coding: utf-8 -*-
"""
ca2n.numerics.modules
~~~~~~~~~~~~~~~~~~~~~

Parameter containers. A :class:`Module` exposes its trainable tensors
under stable dotted names, which is what checkpoints are keyed by.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import numpy as np

from ..core.exceptions import ValidationError
from . import ops
from .tensor import Tensor

LEAKY_SLOPE = 0.2


def kaiming_uniform(rng, shape, fan_in, slope=LEAKY_SLOPE):
    gain = np.sqrt(2.0 / (1.0 + slope ** 2))
    bound = gain * np.sqrt(3.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Module(object):
    """Base class of everything holding parameters.

    Parameters and submodules are discovered from instance attributes in
    assignment order; attributes starting with an underscore are skipped.
    """

    def forward(self, *args, **kwargs):
        """Computes the module output.

        This method is abstract.
        """
        raise NotImplementedError

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def _children(self):
        for key, value in vars(self).items():
            if not key.startswith("_"):
                yield key, value

    def named_parameters(self, prefix=""):
        """Yields ``(name, tensor)`` for every trainable tensor."""
        for key, value in self._children():
            name = prefix + key
            if isinstance(value, Tensor) and value.trainable:
                yield name, value
            elif isinstance(value, Module):
                yield from value.named_parameters(prefix=name + ".")

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def state(self):
        """Returns an ordered ``{name: array}`` copy of all parameters."""
        return {name: p.numpy() for name, p in self.named_parameters()}

    def load_state(self, arrays):
        """Replaces the parameter values with ``arrays``.

        The name sets must match exactly and every array must have the
        shape of the parameter it replaces.
        """
        params = dict(self.named_parameters())
        missing = sorted(set(params) - set(arrays))
        extra = sorted(set(arrays) - set(params))
        if missing or extra:
            raise ValidationError(
                "state",
                "parameter names differ; missing: {}; unexpected: {}".format(
                    ", ".join(missing) or "-", ", ".join(extra) or "-"
                ),
            )
        for name, param in params.items():
            value = np.asarray(arrays[name])
            if value.shape != param.shape:
                raise ValidationError(
                    name,
                    "shape {} does not match parameter shape {}".format(
                        value.shape, param.shape
                    ),
                )
            param.data = value.astype(param.dtype)

    def parameter_count(self):
        return sum(p.size for p in self.parameters())


class ModuleList(Module):
    """Ordered submodules, named by their index."""

    def __init__(self, modules=()):
        self._modules = list(modules)

    def _children(self):
        for index, module in enumerate(self._modules):
            yield str(index), module

    def append(self, module):
        self._modules.append(module)

    def __iter__(self):
        return iter(self._modules)

    def __len__(self):
        return len(self._modules)

    def __getitem__(self, index):
        return self._modules[index]


class ModuleDict(Module):
    """Submodules keyed by name, kept in insertion order."""

    def __init__(self, modules=()):
        self._modules = dict(modules)

    def _children(self):
        return iter(self._modules.items())

    def __getitem__(self, key):
        return self._modules[key]

    def __contains__(self, key):
        return key in self._modules

    def __iter__(self):
        return iter(self._modules)

    def __len__(self):
        return len(self._modules)

    def items(self):
        return self._modules.items()

    def values(self):
        return self._modules.values()


class Linear(Module):
    def __init__(self, in_features, out_features, rng, scale=1.0):
        self.in_features = in_features
        self.out_features = out_features
        self.weight = Tensor(
            scale * kaiming_uniform(rng, (out_features, in_features), in_features),
            trainable=True,
            name="weight",
        )
        self.bias = Tensor(np.zeros(out_features), trainable=True, name="bias")

    def forward(self, x):
        return ops.linear(x, self.weight, self.bias)


class Conv2d(Module):
    def __init__(
        self, in_channels, out_channels, kernel_size, rng, stride=1, padding=0
    ):
        self.stride = stride
        self.padding = padding
        fan_in = in_channels * kernel_size * kernel_size
        self.weight = Tensor(
            kaiming_uniform(
                rng, (out_channels, in_channels, kernel_size, kernel_size), fan_in
            ),
            trainable=True,
            name="weight",
        )
        self.bias = Tensor(np.zeros(out_channels), trainable=True, name="bias")

    @property
    def out_channels(self):
        return self.weight.shape[0]

    def forward(self, x):
        return ops.conv2d(x, self.weight, self.bias, self.stride, self.padding)


class ConvTranspose2d(Module):
    def __init__(
        self, in_channels, out_channels, kernel_size, rng, stride=1, padding=0
    ):
        self.stride = stride
        self.padding = padding
        fan_in = in_channels * kernel_size * kernel_size
        self.weight = Tensor(
            kaiming_uniform(
                rng, (in_channels, out_channels, kernel_size, kernel_size), fan_in
            ),
            trainable=True,
            name="weight",
        )
        self.bias = Tensor(np.zeros(out_channels), trainable=True, name="bias")

    def forward(self, x, output_padding=0):
        return ops.conv2d_transpose(
            x, self.weight, self.bias, self.stride, self.padding, output_padding
        )

    def output_padding_for(self, target, size):
        """Output padding mapping a ``size`` input onto ``target``, both
        ``(rows, columns)``."""
        kh, kw = self.weight.shape[2:]
        return (
            ops.transpose_output_padding(
                target[0], size[0], kh, self.stride, self.padding
            ),
            ops.transpose_output_padding(
                target[1], size[1], kw, self.stride, self.padding
            ),
        )
