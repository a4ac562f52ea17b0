# -*- coding: utf-8 -*-
"""
ca2n.stage1.attention
~~~~~~~~~~~~~~~~~~~~~

Convolutional block attention: a per-channel gate followed by a
per-position gate, both sigmoid-bounded.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import logging

from ..core.exceptions import require
from ..numerics import Conv2d, Linear, Module, Tensor, ops
from ..numerics.gradcheck import GradcheckCase, projected
from ..plugins import impl

logger = logging.getLogger(__name__)


class ChannelGate(Module):
    """Shared two-layer perceptron over the average and max pooled
    channel descriptors; the two outputs are summed before the sigmoid."""

    def __init__(self, channels, reduction, rng):
        require(
            reduction >= 1 and channels % reduction == 0,
            "channels",
            "{} channels are not divisible by reduction ratio {}",
            channels,
            reduction,
        )
        self.hidden = Linear(channels, channels // reduction, rng)
        self.output = Linear(channels // reduction, channels, rng)

    def _perceptron(self, descriptor):
        return self.output(ops.relu(self.hidden(descriptor)))

    def forward(self, x):
        n, c = x.shape[:2]
        avg = ops.reshape(ops.global_pool(x, "avg"), (n, c))
        peak = ops.reshape(ops.global_pool(x, "max"), (n, c))
        gate = ops.sigmoid(ops.add(self._perceptron(avg), self._perceptron(peak)))
        return ops.reshape(gate, (n, c, 1, 1))


class SpatialGate(Module):
    """Convolution over the channelwise mean and max maps."""

    def __init__(self, kernel_size, rng):
        require(
            kernel_size % 2 == 1, "kernel", "kernel size {} must be odd", kernel_size
        )
        self.conv = Conv2d(2, 1, kernel_size, rng, padding=kernel_size // 2)

    def forward(self, x):
        pooled = ops.concat(
            [
                ops.mean(x, axis=1, keepdims=True, order_invariant=True),
                ops.amax(x, axis=1, keepdims=True),
            ],
            axis=1,
        )
        return ops.sigmoid(self.conv(pooled))


class CBAM(Module):
    """``out = Ms * (Mc * x)`` with channel gate ``Mc`` and spatial gate
    ``Ms``.

    :param channels: Number of input channels C, divisible by ``reduction``.
    :param reduction: Ratio r of the perceptron's hidden width C / r.
    :param kernel_size: Odd size k of the spatial convolution.
    """

    def __init__(self, channels, rng, reduction=8, kernel_size=7):
        self.channel = ChannelGate(channels, reduction, rng)
        self.spatial = SpatialGate(kernel_size, rng)

    def gates(self, x):
        """Returns ``(Mc, Ms, out)``."""
        channel_gate = self.channel(x)
        refined = ops.mul(x, channel_gate)
        spatial_gate = self.spatial(refined)
        return channel_gate, spatial_gate, ops.mul(refined, spatial_gate)

    def forward(self, x):
        require(x.ndim == 4, "features", "expected [N, C, H, W], got {}", x.shape)
        return self.gates(x)[2]


def cbam(features, params):
    """Applies the attention block ``params`` to ``features``."""
    return params(features)


def _build_cbam_case(rng):
    block = CBAM(8, rng, reduction=4, kernel_size=3)
    x = Tensor(rng.standard_normal((2, 8, 5, 4)), trainable=True)

    def fn(x, *params):
        return block(x)

    return projected(fn, rng), [x] + block.parameters()


@impl
def ca2n_gradcheck_cases():
    return {"cbam": GradcheckCase(_build_cbam_case, tolerance=1e-3, instances=5)}
