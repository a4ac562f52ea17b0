# -*- coding: utf-8 -*-
"""
ca2n.stage1.training
~~~~~~~~~~~~~~~~~~~~

Self-supervised training of the five component autoencoders on
component sketches, with a per-pixel L1 reconstruction loss.

The autoencoders are independent; with more than one thread they train
concurrently, each confined to its own worker.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

import attr
import numpy as np

from ..core.exceptions import TrainingDiverged, TrainingInterrupted, require
from ..facelayout import ComponentId, default_layout, paste_components, split
from ..numerics import Optimizer, Tape, Tensor, backward, ops
from ..utils.helpers import seeded_rng
from ..utils.runlog import STAGE1_COLUMNS, LossLog
from .autoencoder import AutoencoderSet

logger = logging.getLogger(__name__)


@attr.s
class Stage1Result(object):
    autoencoders = attr.ib()
    #: ``{ComponentId: [mean L1 per epoch]}``
    history = attr.ib(factory=dict)


def reconstruction_l1(reconstruction, target):
    return ops.reduce_mean(ops.absolute(ops.sub(reconstruction, target)))


def component_patches(sketches, layout):
    """Returns ``{ComponentId: [N, 1, h, w] array}`` for a sketch batch."""
    parts = split(Tensor(sketches), layout)
    return {component: parts[component].data for component in ComponentId}


def _train_component(component, autoencoder, patches, config, stop, history):
    rng = seeded_rng(config.seed, "stage1-order", component.value)
    optimizer = Optimizer(
        autoencoder.named_parameters(),
        lr=config.learning_rate,
        beta1=config.beta1,
        beta2=config.beta2,
        eps=config.adam_eps,
    )
    count = len(patches)
    for epoch in range(config.stage1_epochs):
        order = rng.permutation(count)
        total = 0.0
        for start in range(0, count, config.batch_size):
            if stop is not None and stop.is_set():
                raise TrainingInterrupted(
                    "stage 1 interrupted in epoch {} ({})".format(
                        epoch, component.value
                    )
                )
            batch = Tensor(patches[order[start:start + config.batch_size]])
            with Tape() as tape:
                loss = reconstruction_l1(autoencoder(batch), batch)
            value = loss.item()
            if not np.isfinite(value):
                raise TrainingDiverged(
                    "non-finite reconstruction loss",
                    epoch=epoch,
                    component=component.value,
                )
            try:
                optimizer.step(backward(loss, tape))
            except TrainingDiverged as exc:
                raise TrainingDiverged(
                    exc.reason, epoch=epoch, component=component.value, term=exc.term
                )
            total += value * batch.shape[0]
        history.append(total / count)
        logger.info(
            "stage1 {} epoch {}/{}: l1 {:.5f}".format(
                component.value, epoch + 1, config.stage1_epochs, history[-1]
            )
        )
    return history


def train_stage1(sketches, config, layout=None, log_path=None, stop=None):
    """Trains one autoencoder per face component.

    :param sketches: ``[N, 1, S, S]`` array of sketches in ``[0, 1]``.
    :param config: The :class:`ca2n.utils.settings.RunConfig`.
    :param layout: Component layout, defaults to the configured one.
    :param log_path: Optional CSV file receiving one row per epoch and
        component.
    :param stop: Optional event; when set, training stops at the next step
        and raises :class:`TrainingInterrupted` carrying the partial result.
    :returns: :class:`Stage1Result`
    """
    sketches = np.asarray(sketches)
    require(len(sketches) > 0, "sketches", "the training set is empty")
    layout = layout or default_layout(config.resolution, config.layout)
    require(
        sketches.ndim == 4 and sketches.shape[1:] == (1, layout.size, layout.size),
        "sketches",
        "expected [N, 1, {0}, {0}] sketches, got {1}",
        layout.size,
        sketches.shape,
    )

    autoencoders = AutoencoderSet.build(layout, config)
    patches = component_patches(sketches, layout)
    result = Stage1Result(autoencoders, {c: [] for c in ComponentId})

    def work(component):
        return _train_component(
            component,
            autoencoders[component],
            patches[component],
            config,
            stop,
            result.history[component],
        )

    workers = max(1, min(config.threads, len(ComponentId)))
    try:
        if workers == 1:
            for component in ComponentId:
                work(component)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(work, c) for c in ComponentId]
                for future in futures:
                    future.result()
    except TrainingInterrupted as exc:
        exc.result = result
        raise
    finally:
        if log_path:
            _write_log(log_path, result.history)
    return result


def _write_log(path, history):
    """Writes the epochs reached, component by component in
    :class:`ComponentId` order."""
    log = LossLog(path, STAGE1_COLUMNS)
    for component in ComponentId:
        for epoch, l1 in enumerate(history.get(component, ())):
            log.write(epoch=epoch, component=component.value, l1=l1)


def component_reconstructions(autoencoders, sketch, layout):
    """Returns ``{component: [N, 1, h, w] array}`` decoded from the
    patches of ``sketch``."""
    parts = split(Tensor(sketch), layout)
    return {
        component: autoencoders[component](parts[component]).numpy()
        for component in ComponentId
    }


def reconstruct(autoencoders, sketch, layout):
    """Decodes every component of ``sketch`` (``[N, 1, S, S]``) and
    pastes the reconstructions into the decoded remainder."""
    decoded = {
        component: Tensor(patch)
        for component, patch in component_reconstructions(
            autoencoders, sketch, layout
        ).items()
    }
    remainder = decoded.pop(ComponentId.REMAINDER)
    return paste_components(remainder, decoded, layout).numpy()
