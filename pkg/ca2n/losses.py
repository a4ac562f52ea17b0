# -*- coding: utf-8 -*-
"""
ca2n.losses
~~~~~~~~~~~

The loss terms of the stage 2 objective and their weighted sum.

Images are ``[N, C, H, W]`` tensors in ``[0, 1]``; every loss returns a
scalar tensor that can be differentiated.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import logging

import attr
import numpy as np

from .core.exceptions import TrainingDiverged, ValidationError, require
from .numerics import Tensor, ops
from .numerics.modules import kaiming_uniform
from .translator.noise import perturb
from .utils.helpers import seeded_rng

logger = logging.getLogger(__name__)

#: Loss terms in the order they are summed and logged.
TERMS = ("content", "adversarial", "perceptual", "induced", "structural")


def _non_negative(instance, attribute, value):
    if value < 0:
        raise ValidationError(attribute.name, "weight must not be negative")


@attr.s(frozen=True)
class LossWeights(object):
    w_content = attr.ib(default=100.0, converter=float, validator=_non_negative)
    w_adv = attr.ib(default=1.0, converter=float, validator=_non_negative)
    w_perc = attr.ib(default=1.0, converter=float, validator=_non_negative)
    w_induced = attr.ib(default=1.0, converter=float, validator=_non_negative)
    w_str = attr.ib(default=1.0, converter=float, validator=_non_negative)

    def __attrs_post_init__(self):
        require(
            any(attr.astuple(self)), "weights", "at least one weight must be positive"
        )

    def weight(self, term):
        return {
            "content": self.w_content,
            "adversarial": self.w_adv,
            "perceptual": self.w_perc,
            "induced": self.w_induced,
            "structural": self.w_str,
        }[term]

    @classmethod
    def from_config(cls, config):
        return cls(
            config.w_content,
            config.w_adv,
            config.w_perc,
            config.w_induced,
            config.w_str,
        )


@attr.s(frozen=True)
class SsimConstants(object):
    dynamic_range = attr.ib(default=1.0)
    k1 = attr.ib(default=0.01)
    k2 = attr.ib(default=0.03)

    @property
    def c1(self):
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self):
        return (self.k2 * self.dynamic_range) ** 2


@attr.s(frozen=True)
class LossTerm(object):
    raw = attr.ib()
    weighted = attr.ib()


class FeatureExtractor(object):
    """Fixed random convolutional features for perceptual comparisons.

    Four blocks of 3x3 convolution, relu and 2x2 average pooling with
    seeded weights that never change. Calling it returns the flattened
    ``[N, D]`` features, :meth:`embed` the globally averaged last block.
    """

    def __init__(self, seed, channels=(16, 32, 64, 64), in_channels=3):
        rng = seeded_rng(seed, "feature_extractor")
        self.kernels = []
        self.biases = []
        previous = in_channels
        for count in channels:
            weight = kaiming_uniform(rng, (count, previous, 3, 3), previous * 9, 0.0)
            kernel = Tensor(weight)
            kernel.data.setflags(write=False)
            bias = Tensor(np.zeros(count))
            bias.data.setflags(write=False)
            self.kernels.append(kernel)
            self.biases.append(bias)
            previous = count

    def maps(self, images):
        x = images
        for kernel, bias in zip(self.kernels, self.biases):
            x = ops.relu(ops.conv2d(x, kernel, bias, stride=1, padding=1))
            if min(x.shape[2:]) >= 2:
                x = ops.pool(x, "avg", 2)
        return x

    def __call__(self, images):
        return ops.flatten(self.maps(images))

    def embed(self, images):
        n, c = images.shape[0], self.kernels[-1].shape[0]
        return ops.reshape(ops.global_pool(self.maps(images), "avg"), (n, c))


def build_feature_extractor(config, plugin_manager=None):
    """Returns the extractor a plugin supplies, or the seeded default."""
    if plugin_manager is not None:
        extractor = plugin_manager.hook.ca2n_feature_extractor(config=config)
        if extractor is not None:
            logger.info("Using feature extractor {!r}".format(extractor))
            return extractor
    return FeatureExtractor(config.seed, config.extractor_channels)


def _same_shape(a, b, op):
    require(
        a.shape == b.shape, op, "shape mismatch: {} vs {}", a.shape, b.shape
    )


def _probabilities(scores, name):
    data = scores.data
    require(
        bool(np.all((data > 0) & (data < 1))),
        name,
        "scores must lie in the open interval (0, 1)",
    )


def content_l1(generated, real):
    """Mean absolute difference of ``generated`` and ``real``."""
    _same_shape(generated, real, "content_l1")
    return ops.reduce_mean(ops.absolute(ops.sub(generated, real)))


def adversarial_d(real_scores, fake_scores):
    """Binary cross entropy with label 1 for real and 0 for fake scores."""
    _probabilities(real_scores, "real_scores")
    _probabilities(fake_scores, "fake_scores")
    real_term = ops.reduce_mean(ops.log(real_scores))
    fake_term = ops.reduce_mean(ops.log(ops.sub(1.0, fake_scores)))
    return ops.neg(ops.add(real_term, fake_term))


def adversarial_g(fake_scores):
    """Non-saturating generator loss ``-mean(log d(g(x)))``."""
    _probabilities(fake_scores, "fake_scores")
    return ops.neg(ops.reduce_mean(ops.log(fake_scores)))


def perceptual(generated, real, extractor):
    """Batch mean of the L2 distance between the features of both
    images."""
    _same_shape(generated, real, "perceptual")
    diff = ops.sub(extractor(generated), extractor(real))
    return ops.reduce_mean(ops.l2_norm(diff, axis=1))


def induced(generated, noise):
    """Mean absolute change of ``generated`` under noise induction.
    ``noise.last_draw`` holds the draw used."""
    return ops.reduce_mean(ops.absolute(ops.sub(perturb(generated, noise), generated)))


def ssim_global(a, b, consts=None):
    """Structural similarity from whole-image statistics, per image and
    channel, averaged over both."""
    _same_shape(a, b, "ssim_global")
    require(a.ndim >= 2, "ssim_global", "expected images, got shape {}", a.shape)
    consts = consts or SsimConstants()
    axes = (a.ndim - 2, a.ndim - 1)

    mu_a = ops.mean(a, axis=axes, keepdims=True)
    mu_b = ops.mean(b, axis=axes, keepdims=True)
    da = ops.sub(a, mu_a)
    db = ops.sub(b, mu_b)
    var_a = ops.mean(ops.square(da), axis=axes, keepdims=True)
    var_b = ops.mean(ops.square(db), axis=axes, keepdims=True)
    cov = ops.mean(ops.mul(da, db), axis=axes, keepdims=True)

    numerator = ops.mul(
        ops.add(ops.mul(ops.mul(mu_a, mu_b), 2.0), consts.c1),
        ops.add(ops.mul(cov, 2.0), consts.c2),
    )
    denominator = ops.mul(
        ops.add(ops.add(ops.square(mu_a), ops.square(mu_b)), consts.c1),
        ops.add(ops.add(var_a, var_b), consts.c2),
    )
    return ops.reduce_mean(ops.div(numerator, denominator))


def structural_loss(real, generated, consts=None):
    return ops.sub(1.0, ssim_global(real, generated, consts))


def global_objective(terms, weights, enabled=TERMS):
    """Weighted sum of the enabled loss terms.

    :param terms: ``{name: scalar tensor}``; terms that are not enabled
        are ignored.
    :param weights: The :class:`LossWeights`.
    :param enabled: Names of the enabled terms.
    :returns: ``(objective, breakdown)`` where ``breakdown`` maps each
        enabled term to its :class:`LossTerm`. Disabled terms are absent.
    """
    enabled = [term for term in TERMS if term in set(enabled)]
    require(len(enabled) > 0, "terms", "no loss term is enabled")
    missing = [term for term in enabled if term not in terms]
    require(not missing, "terms", "enabled terms not computed: {}", ", ".join(missing))

    objective = None
    breakdown = {}
    for name in enabled:
        raw = terms[name].item()
        if not np.isfinite(raw):
            raise TrainingDiverged("non-finite loss term", term=name)
        weight = weights.weight(name)
        breakdown[name] = LossTerm(raw=raw, weighted=weight * raw)
        weighted = ops.mul(terms[name], weight)
        objective = weighted if objective is None else ops.add(objective, weighted)
    return objective, breakdown
