# -*- coding: utf-8 -*-
"""
ca2n.ablation
~~~~~~~~~~~~~

The ablation study: four switches (attention, noise induction, global
loss, image enhancement) and a harness that trains and evaluates the
pipeline once per row of the study table.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import csv
import logging
import os

import attr

from .checkpoint import save_checkpoint
from .core.exceptions import TrainingInterrupted
from .utils.runlog import format_value

logger = logging.getLogger(__name__)

#: ``(cbam, da, gl, ie)`` rows in table order; DA and GL move together.
TABLE = (
    (False, False, False, False),
    (False, False, False, True),
    (False, True, True, False),
    (False, True, True, True),
    (True, False, False, False),
    (True, False, False, True),
    (True, True, True, False),
    (True, True, True, True),
)

REPORT_COLUMNS = (
    "cbam",
    "da",
    "gl",
    "ie",
    "fid",
    "is",
    "kid",
    "ssim",
    "psnr",
    "frechet_proxy",
)


@attr.s(frozen=True)
class AblationFlags(object):
    cbam = attr.ib(default=True, converter=bool)
    da = attr.ib(default=True, converter=bool)
    gl = attr.ib(default=True, converter=bool)
    ie = attr.ib(default=True, converter=bool)
    #: finer switches below DA and GL
    loss_induced = attr.ib(default=True, converter=bool)
    loss_perceptual = attr.ib(default=True, converter=bool)
    loss_structural = attr.ib(default=True, converter=bool)

    @classmethod
    def from_config(cls, config):
        return cls(
            config.cbam,
            config.da,
            config.gl,
            config.ie,
            config.loss_induced,
            config.loss_perceptual,
            config.loss_structural,
        )

    def settings(self):
        """The flags as configuration overrides."""
        return {
            "CBAM": self.cbam,
            "DA": self.da,
            "GL": self.gl,
            "IE": self.ie,
            "LOSS_INDUCED": self.loss_induced,
            "LOSS_PERCEPTUAL": self.loss_perceptual,
            "LOSS_STRUCTURAL": self.loss_structural,
        }


@attr.s(frozen=True)
class PipelineSwitches(object):
    cbam = attr.ib()
    terms = attr.ib(converter=tuple)
    #: enhancement mode the pipeline runs
    hook = attr.ib(default="identity")

    @property
    def hook_identity(self):
        return self.hook == "identity"


def ablation_flags_to_pipeline(flags, hook="unsharp"):
    """Translates ablation flags into what the pipeline runs.

    Content and adversarial terms are always on; DA adds the induced
    term, GL the perceptual and structural terms. IE runs ``hook``,
    without IE the hook is the identity.
    """
    terms = ["content", "adversarial"]
    if flags.gl and flags.loss_perceptual:
        terms.append("perceptual")
    if flags.da and flags.loss_induced:
        terms.append("induced")
    if flags.gl and flags.loss_structural:
        terms.append("structural")
    return PipelineSwitches(
        cbam=flags.cbam, terms=terms, hook=hook if flags.ie else "identity"
    )


def _checkpoint_interrupted(exc, models, directory, name):
    path = os.path.join(directory, name)
    save_checkpoint(models, path)
    raise TrainingInterrupted(
        "{}; checkpoint of the state reached written to {}".format(str(exc), path),
        result=exc.result,
    )


def run_ablation(
    runtime, train, test, report_path, rows=TABLE, stop=None, checkpoint_dir=None
):
    """Trains and evaluates one pipeline per flag row and writes the
    report, one line per row.

    :param runtime: The :class:`ca2n.app.Runtime` holding the base
        configuration; the flags of each row override it.
    :param train: Training :class:`ca2n.dataio.DatasetManifest`.
    :param test: Test manifest the rows are evaluated on.
    :param stop: Optional event; when set, the running row stops, its
        models are checkpointed under ``checkpoint_dir`` (defaults to
        ``CHECKPOINT_DIR``) and :class:`TrainingInterrupted` is raised.
    :returns: list of ``{column: value}`` rows.
    """
    from .facelayout import default_layout
    from .losses import build_feature_extractor
    from .metrics import UNAVAILABLE, evaluate
    from .stage1.training import train_stage1
    from .translator.enhance import EnhancementHook, HookConfig
    from .translator.inference import Pipeline
    from .translator.training import train_stage2

    checkpoint_dir = checkpoint_dir or runtime.config.checkpoint_dir
    results = []
    directory = os.path.dirname(os.path.abspath(report_path))
    os.makedirs(directory, exist_ok=True)
    with open(report_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for index, row in enumerate(rows):
            base = runtime.config
            flags = AblationFlags(
                *row,
                loss_induced=base.loss_induced,
                loss_perceptual=base.loss_perceptual,
                loss_structural=base.loss_structural,
            )
            switches = ablation_flags_to_pipeline(flags, base.ablation_hook)
            config = base.replace(
                cbam=switches.cbam,
                da=flags.da,
                gl=flags.gl,
                ie=flags.ie,
                hook=switches.hook,
            )
            logger.info(
                "Ablation row {}/{}: cbam={} da={} gl={} ie={} hook={}".format(
                    index + 1, len(rows), *row, switches.hook
                )
            )
            name = "ablation_row{}_{{}}.ckpt".format(index + 1)
            layout = default_layout(config.resolution, config.layout)
            try:
                stage1 = train_stage1(train.sketches(), config, layout, stop=stop)
            except TrainingInterrupted as exc:
                _checkpoint_interrupted(
                    exc,
                    {"autoencoders": exc.result.autoencoders},
                    checkpoint_dir,
                    name.format("stage1"),
                )
            try:
                stage2 = train_stage2(
                    train,
                    stage1.autoencoders,
                    config,
                    layout=layout,
                    plugin_manager=runtime.plugin_manager,
                    stop=stop,
                )
            except TrainingInterrupted as exc:
                _checkpoint_interrupted(
                    exc, exc.result.models, checkpoint_dir, name.format("stage2")
                )
            hook = EnhancementHook(
                HookConfig.from_config(config), runtime.plugin_manager
            )
            pipeline = Pipeline.from_models(stage2.models, layout, hook)
            extractor = build_feature_extractor(config, runtime.plugin_manager)
            report = evaluate(test, pipeline, extractor, config.batch_size)

            if switches.hook_identity:
                ssim, psnr_value, frechet = report.ssim, report.psnr, report.frechet
            else:
                ssim, psnr_value = report.ssim_post, report.psnr_post
                frechet = report.frechet_post
            result = dict(zip(("cbam", "da", "gl", "ie"), (str(int(v)) for v in row)))
            result.update(
                fid=UNAVAILABLE,
                kid=UNAVAILABLE,
                ssim=ssim,
                psnr=psnr_value,
                frechet_proxy=None if frechet is None else frechet.value,
            )
            result["is"] = UNAVAILABLE
            writer.writerow([format_value(result[c]) for c in REPORT_COLUMNS])
            fh.flush()
            results.append(result)
    return results
