# -*- coding: utf-8 -*-
"""
ca2n.numerics.gradcheck
~~~~~~~~~~~~~~~~~~~~~~~

Compares tape gradients with central finite differences in 64-bit
precision.

Every operator has a case that builds random inputs; outputs that are
not scalar are reduced with a fixed random projection. Cases for whole
networks are contributed through the ``ca2n_gradcheck_cases`` hook.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import logging

import attr
import numpy as np

from ..core.exceptions import ValidationError
from ..utils.helpers import seeded_rng
from . import ops
from .modules import Linear
from .tensor import Tape, Tensor, backward, precision

logger = logging.getLogger(__name__)

STEP = 1e-5
TOLERANCE = 1e-4
DENOMINATOR_FLOOR = 1e-4


@attr.s(frozen=True)
class GradcheckCase(object):
    """How to check one operator or network.

    :param build: ``build(rng) -> (fn, inputs)`` where ``fn(*inputs)``
        returns a scalar tensor.
    :param sample: Fraction of input elements to check, ``None`` for all.
    """

    build = attr.ib()
    tolerance = attr.ib(default=TOLERANCE)
    instances = attr.ib(default=20)
    sample = attr.ib(default=None)


@attr.s(frozen=True)
class GradcheckResult(object):
    op = attr.ib()
    passed = attr.ib()
    max_error = attr.ib()
    tolerance = attr.ib()
    instances = attr.ib()
    checked = attr.ib()


def relative_error(analytic, numeric, floor=DENOMINATOR_FLOOR):
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def check_gradients(fn, inputs, h=STEP, sample=None, rng=None):
    """Returns ``(max relative error, number of elements checked)``.

    The elements of ``inputs`` are perturbed in place and restored.
    """
    with Tape() as tape:
        loss = fn(*inputs)
    grads = backward(loss, tape, wrt=inputs)

    worst = 0.0
    checked = 0
    for tensor in inputs:
        flat = tensor.data.reshape(-1)
        positions = np.arange(flat.size)
        if sample is not None:
            count = max(1, int(round(sample * flat.size)))
            positions = rng.choice(flat.size, size=count, replace=False)
        analytic = grads[tensor].reshape(-1)
        for pos in positions:
            original = flat[pos]
            flat[pos] = original + h
            upper = fn(*inputs).item()
            flat[pos] = original - h
            lower = fn(*inputs).item()
            flat[pos] = original
            numeric = (upper - lower) / (2 * h)
            worst = max(worst, relative_error(analytic[pos], numeric))
            checked += 1
    return worst, checked


def projected(fn, shape_rng):
    """Wraps ``fn`` so its output is reduced by a random projection."""
    weights = {}

    def wrapper(*inputs):
        out = fn(*inputs)
        if out.shape not in weights:
            weights[out.shape] = Tensor(shape_rng.standard_normal(out.shape))
        return ops.sum(ops.mul(out, weights[out.shape]))

    return wrapper


def _param(rng, *shape):
    return Tensor(rng.standard_normal(shape), trainable=True)


def _away_from_zero(rng, *shape):
    signs = rng.choice([-1.0, 1.0], size=shape)
    return Tensor(signs * rng.uniform(0.1, 1.0, size=shape), trainable=True)


def _distinct(rng, *shape):
    count = int(np.prod(shape))
    values = rng.permutation(count) * (1.0 / count) - 0.5
    return Tensor(values.reshape(shape), trainable=True)


def _positive(rng, *shape):
    return Tensor(rng.uniform(0.5, 2.0, size=shape), trainable=True)


def _unary(op, make=_param, shape=(3, 4)):
    def build(rng):
        return projected(op, rng), [make(rng, *shape)]

    return build


def _binary(op, make_b=_param):
    def build(rng):
        return projected(op, rng), [_param(rng, 3, 4), make_b(rng, 3, 4)]

    return build


def _build_conv2d(rng):
    stride = int(rng.choice([1, 2]))
    padding = int(rng.choice([0, 1]))

    def fn(x, k, b):
        return ops.conv2d(x, k, b, stride, padding)

    return projected(fn, rng), [
        _param(rng, 2, 3, 6, 5),
        _param(rng, 4, 3, 3, 3),
        _param(rng, 4),
    ]


def _build_conv2d_transpose(rng):
    output_padding = int(rng.choice([0, 1]))

    def fn(x, k, b):
        return ops.conv2d_transpose(x, k, b, 2, 1, output_padding)

    return projected(fn, rng), [
        _param(rng, 2, 3, 3, 4),
        _param(rng, 3, 2, 3, 3),
        _param(rng, 2),
    ]


def _build_linear(rng):
    return projected(ops.linear, rng), [
        _param(rng, 3, 5),
        _param(rng, 4, 5),
        _param(rng, 4),
    ]


def _build_clamp(rng):
    values = rng.uniform(-2.0, 2.0, size=(3, 4))
    near = np.abs(np.abs(values) - 0.5) < 0.05
    values[near] += 0.2

    def fn(x):
        return ops.clamp(x, -0.5, 0.5)

    return projected(fn, rng), [Tensor(values, trainable=True)]


def _build_pool(kind, make):
    def build(rng):
        def fn(x):
            return ops.pool(x, kind, 2, 2)

        return projected(fn, rng), [make(rng, 2, 2, 4, 4)]

    return build


def _build_global_pool(kind, make):
    def build(rng):
        def fn(x):
            return ops.global_pool(x, kind)

        return projected(fn, rng), [make(rng, 2, 3, 3, 3)]

    return build


def _build_concat(rng):
    def fn(a, b):
        return ops.concat([a, b], axis=1)

    return projected(fn, rng), [_param(rng, 2, 3), _param(rng, 2, 2)]


def _build_crop_paste(rng):
    region = (1, 2, 2, 3)

    def fn(target, patch):
        return ops.paste(ops.mul(target, 2.0), ops.crop(patch, (0, 0, 2, 3)), region)

    return projected(fn, rng), [_param(rng, 2, 6, 5), _param(rng, 2, 4, 4)]


def _build_mlp(rng):
    layers = [Linear(5, 6, rng), Linear(6, 4, rng), Linear(4, 2, rng)]
    params = [p for layer in layers for p in layer.parameters()]

    def fn(x, *unused):
        h = ops.tanh(layers[0](x))
        h = ops.sigmoid(layers[1](h))
        return layers[2](h)

    return projected(fn, rng), [_param(rng, 3, 5)] + params


OPERATOR_CASES = {
    "conv2d": GradcheckCase(_build_conv2d),
    "conv2d_transpose": GradcheckCase(_build_conv2d_transpose),
    "linear": GradcheckCase(_build_linear),
    "pool_max": GradcheckCase(_build_pool("max", _distinct)),
    "pool_avg": GradcheckCase(_build_pool("avg", _param)),
    "global_pool_max": GradcheckCase(_build_global_pool("max", _distinct)),
    "global_pool_avg": GradcheckCase(_build_global_pool("avg", _param)),
    "sigmoid": GradcheckCase(_unary(ops.sigmoid)),
    "relu": GradcheckCase(_unary(ops.relu, _away_from_zero)),
    "leaky_relu": GradcheckCase(_unary(ops.leaky_relu, _away_from_zero)),
    "tanh": GradcheckCase(_unary(ops.tanh)),
    "abs": GradcheckCase(_unary(ops.absolute, _away_from_zero)),
    "clamp": GradcheckCase(_build_clamp),
    "log": GradcheckCase(_unary(ops.log, _positive)),
    "sqrt": GradcheckCase(_unary(ops.sqrt, _positive)),
    "add": GradcheckCase(_binary(ops.add)),
    "sub": GradcheckCase(_binary(ops.sub)),
    "mul": GradcheckCase(_binary(ops.mul)),
    "div": GradcheckCase(_binary(ops.div, _positive)),
    "reduce_mean": GradcheckCase(_unary(ops.reduce_mean)),
    "mean_axis": GradcheckCase(_unary(lambda a: ops.mean(a, axis=1))),
    "sum_sorted": GradcheckCase(
        _unary(lambda a: ops.sum(a, axis=0, order_invariant=True))
    ),
    "amax": GradcheckCase(_unary(lambda a: ops.amax(a, axis=1), _distinct)),
    "l2_norm": GradcheckCase(_unary(lambda a: ops.l2_norm(a, axis=1))),
    "concat": GradcheckCase(_build_concat),
    "crop_paste": GradcheckCase(_build_crop_paste),
    "mlp3": GradcheckCase(_build_mlp),
}


def available_cases(plugin_manager=None):
    """Returns the operator cases merged with hook-provided ones."""
    cases = dict(OPERATOR_CASES)
    if plugin_manager is not None:
        cases.update(plugin_manager.collect("ca2n_gradcheck_cases"))
    return cases


def run_suite(seed, names=None, cases=None, instances=None):
    """Runs the selected gradient checks in 64-bit precision.

    :param seed: Seed for input generation.
    :param names: Case names to run, all when ``None``.
    :param cases: ``{name: GradcheckCase}``, see :func:`available_cases`.
    :param instances: Overrides the per-case instance count.
    :returns: list of :class:`GradcheckResult`.
    """
    cases = OPERATOR_CASES if cases is None else cases
    names = list(cases) if not names else list(names)
    unknown = [name for name in names if name not in cases]
    if unknown:
        raise ValidationError(
            "ops",
            "unknown gradient check(s): {}; available: {}".format(
                ", ".join(unknown), ", ".join(sorted(cases))
            ),
        )

    results = []
    with precision("float64"):
        for name in names:
            case = cases[name]
            rng = seeded_rng(seed, "gradcheck", name)
            count = instances or case.instances
            worst = 0.0
            checked = 0
            for _ in range(count):
                fn, inputs = case.build(rng)
                error, n = check_gradients(fn, inputs, sample=case.sample, rng=rng)
                worst = max(worst, error)
                checked += n
            result = GradcheckResult(
                op=name,
                passed=worst < case.tolerance,
                max_error=worst,
                tolerance=case.tolerance,
                instances=count,
                checked=checked,
            )
            logger.info(
                "gradcheck {}: max relative error {:.3e} over {} elements ({})".format(
                    name, worst, checked, "ok" if result.passed else "FAILED"
                )
            )
            results.append(result)
    return results
