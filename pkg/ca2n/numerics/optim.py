# -*- coding: utf-8 -*-
"""
ca2n.numerics.optim
~~~~~~~~~~~~~~~~~~~

Adaptive-moment optimizer with bias correction, and a plain gradient
descent mode.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import attr
import numpy as np
from attr.validators import in_

from ..core.exceptions import require


@attr.s
class OptimizerState(object):
    """Per-parameter moment accumulators keyed by parameter name."""

    lr = attr.ib(default=2e-4)
    beta1 = attr.ib(default=0.9)
    beta2 = attr.ib(default=0.999)
    eps = attr.ib(default=1e-8)
    mode = attr.ib(default="adam", validator=in_(("adam", "sgd")))
    step = attr.ib(default=0)
    first_moment = attr.ib(factory=dict)
    second_moment = attr.ib(factory=dict)


def optimizer_step(params, grads, state):
    """Applies one update to ``params``.

    :param params: Mapping of names to trainable tensors.
    :param grads: Mapping of names to gradient arrays; missing names
        count as zero gradients.
    :param state: The :class:`OptimizerState`, updated in place.
    :returns: ``(params, state)``
    """
    state.step += 1
    t = state.step
    for name, param in params.items():
        grad = grads.get(name)
        if grad is None:
            grad = np.zeros_like(param.data)
        require(
            grad.shape == param.shape,
            name,
            "gradient shape {} does not match parameter shape {}",
            grad.shape,
            param.shape,
        )

        if state.mode == "sgd":
            param.data = (param.data - state.lr * grad).astype(param.dtype)
            continue

        m = state.first_moment.get(name)
        v = state.second_moment.get(name)
        if m is None:
            m = np.zeros(param.shape, dtype=np.float64)
            v = np.zeros(param.shape, dtype=np.float64)
        m = state.beta1 * m + (1 - state.beta1) * grad
        v = state.beta2 * v + (1 - state.beta2) * grad * grad
        state.first_moment[name] = m
        state.second_moment[name] = v

        m_hat = m / (1 - state.beta1 ** t)
        v_hat = v / (1 - state.beta2 ** t)
        update = state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
        param.data = (param.data - update).astype(param.dtype)
    return params, state


class Optimizer(object):
    """Binds an :class:`OptimizerState` to the parameters of modules.

    :param named_params: ``{name: tensor}`` of the parameters to update.
    """

    def __init__(self, named_params, **options):
        self.params = dict(named_params)
        self.state = OptimizerState(**options)

    def step(self, gradients):
        """Updates the parameters from a ``{tensor: array}`` mapping as
        returned by :func:`ca2n.numerics.tensor.backward`."""
        by_name = {
            name: gradients[param]
            for name, param in self.params.items()
            if param in gradients
        }
        optimizer_step(self.params, by_name, self.state)
