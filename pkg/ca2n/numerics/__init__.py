# -*- coding: utf-8 -*-
"""
ca2n.numerics
~~~~~~~~~~~~~

Tensors, the operator set, parameter modules and the optimizer every
network of the pipeline is built from.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

from .modules import (  # noqa
    Conv2d,
    ConvTranspose2d,
    Linear,
    Module,
    ModuleDict,
    ModuleList,
)
from .optim import Optimizer, OptimizerState, optimizer_step  # noqa
from .tensor import (  # noqa
    Tape,
    Tensor,
    active_tape,
    backward,
    get_dtype,
    precision,
    set_precision,
)
