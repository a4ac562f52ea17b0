# -*- coding: utf-8 -*-
"""
ca2n.translator.training
~~~~~~~~~~~~~~~~~~~~~~~~

Joint fine-tuning of the component encoders with the feature mappers,
the generator and the discriminator.

Each step first updates the discriminator on real photos against the
detached generator output, then updates encoders, mappers and generator
on the weighted objective.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import logging

import attr
import numpy as np

from ..ablation import AblationFlags, ablation_flags_to_pipeline
from ..core.exceptions import (
    ConfigurationError,
    TrainingDiverged,
    TrainingInterrupted,
    require,
)
from ..facelayout import default_layout
from ..losses import (
    LossWeights,
    adversarial_d,
    adversarial_g,
    build_feature_extractor,
    content_l1,
    global_objective,
    induced,
    perceptual,
    structural_loss,
)
from ..numerics import Optimizer, Tape, Tensor, backward
from ..utils.helpers import seeded_rng
from ..utils.runlog import LossLog, stage2_columns
from .inference import Pipeline
from .mapping import MapperSet
from .networks import Discriminator, Generator
from .noise import NoiseConfig, NoiseSource

logger = logging.getLogger(__name__)


@attr.s
class Stage2Models(object):
    encoders = attr.ib()
    mappers = attr.ib()
    generator = attr.ib()
    discriminator = attr.ib()

    def modules(self):
        """``{prefix: module}`` in checkpoint order."""
        return {
            "encoders": self.encoders,
            "mappers": self.mappers,
            "generator": self.generator,
            "discriminator": self.discriminator,
        }

    def generator_parameters(self):
        """Named parameters the objective updates."""
        params = {}
        for prefix in ("encoders", "mappers", "generator"):
            for name, param in self.modules()[prefix].named_parameters(prefix + "."):
                params[name] = param
        return params

    def discriminator_parameters(self):
        """Named parameters the discriminator loss updates."""
        return dict(self.discriminator.named_parameters("discriminator."))

    @classmethod
    def build(cls, encoders, layout, config):
        """Creates fresh stage 2 networks around trained ``encoders``."""
        return cls(
            encoders=encoders,
            mappers=MapperSet.build(layout, config),
            generator=Generator(
                layout.size,
                seeded_rng(config.seed, "generator"),
                in_channels=config.feature_channels,
                channels=config.generator_channels,
                residual_blocks=config.generator_residual_blocks,
                slope=config.leaky_slope,
            ),
            discriminator=Discriminator(
                seeded_rng(config.seed, "discriminator"),
                channels=config.discriminator_channels,
                with_sketch=config.discriminator_sketch,
                slope=config.leaky_slope,
            ),
        )


@attr.s
class StepRecord(object):
    step = attr.ib()
    d_loss = attr.ib()
    objective = attr.ib()
    breakdown = attr.ib()
    induced_grad_norm = attr.ib(default=None)


@attr.s
class Stage2Result(object):
    models = attr.ib()
    history = attr.ib(factory=list)


def generator_terms(fake, photo, d_fake, terms, extractor, noise):
    """Computes the enabled loss terms of one generator step."""
    values = {
        "content": lambda: content_l1(fake, photo),
        "adversarial": lambda: adversarial_g(d_fake),
        "perceptual": lambda: perceptual(fake, photo, extractor),
        "induced": lambda: induced(fake, noise),
        "structural": lambda: structural_loss(photo, fake),
    }
    return {name: values[name]() for name in terms}


def _optimizer(params, config):
    return Optimizer(
        params,
        lr=config.learning_rate,
        beta1=config.beta1,
        beta2=config.beta2,
        eps=config.adam_eps,
    )


def train_stage2(
    dataset,
    autoencoders,
    config,
    layout=None,
    extractor=None,
    plugin_manager=None,
    log_path=None,
    stop=None,
):
    """Trains the stage 2 networks and fine-tunes the stage 1 encoders.

    :param dataset: Paired :class:`ca2n.dataio.DatasetManifest`.
    :param autoencoders: Trained :class:`ca2n.stage1.AutoencoderSet`; its
        encoders are updated in place.
    :param config: The :class:`ca2n.utils.settings.RunConfig`.
    :param extractor: Feature extractor of the perceptual loss, defaults
        to :func:`ca2n.losses.build_feature_extractor`.
    :param log_path: Optional CSV file for the per-term loss breakdown.
    :param stop: Optional event that interrupts training at the next
        step.
    :returns: :class:`Stage2Result`
    """
    if autoencoders is None:
        raise ConfigurationError("stage 2 needs trained stage 1 autoencoders")
    require(len(dataset) > 0, "dataset", "the training set is empty")
    layout = layout or default_layout(config.resolution, config.layout)
    sketches = dataset.sketches()
    photos = dataset.photos()
    require(
        photos.shape[1:] == (3, layout.size, layout.size),
        "photos",
        "expected [N, 3, {0}, {0}] photos, got {1}",
        layout.size,
        photos.shape,
    )

    switches = ablation_flags_to_pipeline(AblationFlags.from_config(config))
    weights = LossWeights.from_config(config)
    if extractor is None and "perceptual" in switches.terms:
        extractor = build_feature_extractor(config, plugin_manager)
    noise = NoiseSource(NoiseConfig(config.noise_epsilon, config.seed))

    models = Stage2Models.build(autoencoders.encoders(), layout, config)
    pipeline = Pipeline.from_models(models, layout)
    g_optimizer = _optimizer(models.generator_parameters(), config)
    d_optimizer = _optimizer(models.discriminator_parameters(), config)
    log = LossLog(log_path, stage2_columns(switches.terms)) if log_path else None
    result = Stage2Result(models)
    conditional = models.discriminator.with_sketch
    rng = seeded_rng(config.seed, "stage2-batches")
    batch_size = min(config.batch_size, len(dataset))

    for step in range(config.stage2_steps):
        if stop is not None and stop.is_set():
            raise TrainingInterrupted(
                "stage 2 interrupted at step {}".format(step), result=result
            )
        index = np.sort(rng.choice(len(dataset), size=batch_size, replace=False))
        sketch = Tensor(sketches[index])
        photo = Tensor(photos[index])
        condition = sketch if conditional else None

        try:
            with Tape() as g_tape:
                fake = pipeline.translate(sketch)

            with Tape() as d_tape:
                d_loss = adversarial_d(
                    models.discriminator(photo, condition),
                    models.discriminator(fake.detach(), condition),
                )
            d_value = d_loss.item()
            if not np.isfinite(d_value):
                raise TrainingDiverged(
                    "non-finite discriminator loss", term="discriminator"
                )
            d_optimizer.step(backward(d_loss, d_tape))

            with g_tape:
                d_fake = models.discriminator(fake, condition)
                terms = generator_terms(
                    fake, photo, d_fake, switches.terms, extractor, noise
                )
                objective, breakdown = global_objective(terms, weights, switches.terms)
            record = StepRecord(step, d_value, objective.item(), breakdown)
            if "induced" in terms and _is_log_step(step, config):
                gradient = backward(terms["induced"], g_tape, wrt=[fake])[fake]
                record.induced_grad_norm = weights.w_induced * float(
                    np.linalg.norm(gradient)
                )
            g_optimizer.step(backward(objective, g_tape))
        except TrainingDiverged as exc:
            raise TrainingDiverged(exc.reason, step=step, term=exc.term)

        result.history.append(record)
        if _is_log_step(step, config):
            _log_step(log, record, config)
    return result


def _is_log_step(step, config):
    return step % config.log_interval == 0 or step == config.stage2_steps - 1


def _log_step(log, record, config):
    if log is not None:
        values = {
            "step": record.step,
            "d_loss": record.d_loss,
            "objective": record.objective,
            "induced_grad_norm": record.induced_grad_norm,
        }
        for name, term in record.breakdown.items():
            values[name + "_raw"] = term.raw
            values[name + "_weighted"] = term.weighted
        log.write(**values)
    logger.info(
        "stage2 step {}/{}: d {:.4f} objective {:.4f} ({})".format(
            record.step + 1,
            config.stage2_steps,
            record.d_loss,
            record.objective,
            ", ".join(
                "{} {:.4f}".format(name, term.weighted)
                for name, term in record.breakdown.items()
            ),
        )
    )
