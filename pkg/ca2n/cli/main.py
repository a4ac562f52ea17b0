# -*- coding: utf-8 -*-
"""
ca2n.cli.main
~~~~~~~~~~~~~

This module contains the main commands.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import logging
import os
import traceback

import click

from ca2n.ablation import REPORT_COLUMNS, run_ablation
from ca2n.app import load_plugins
from ca2n.checkpoint import apply_tensors, load_checkpoint, save_checkpoint
from ca2n.cli.utils import (
    CA2NCLIError,
    config_option,
    get_version,
    handle_errors,
    make_runtime,
    require_file,
    seed_option,
    stop_on_signal,
)
from ca2n.core.exceptions import EnhancementError, TrainingInterrupted
from ca2n.dataio import (
    export_image,
    load_dataset,
    read_image,
    restyle,
    save_dataset,
    split_train_test,
    synth_faces,
    write_image,
)
from ca2n.dataio.synthetic import STYLES
from ca2n.facelayout import default_layout
from ca2n.losses import build_feature_extractor
from ca2n.metrics import evaluate
from ca2n.numerics.gradcheck import available_cases, run_suite
from ca2n.plugins.manager import CA2NPluginManager
from ca2n.stage1 import (
    AutoencoderSet,
    component_reconstructions,
    reconstruct,
    train_stage1,
)
from ca2n.translator.enhance import EnhancementHook, HookConfig
from ca2n.translator.inference import Pipeline
from ca2n.translator.training import Stage2Models, train_stage2
from ca2n.utils.runlog import format_value

logger = logging.getLogger(__name__)

STAGE1_CHECKPOINT = "stage1.ckpt"
STAGE2_CHECKPOINT = "stage2.ckpt"


class CA2NGroup(click.Group):
    def __init__(self, *args, **kwargs):
        super(CA2NGroup, self).__init__(*args, **kwargs)
        self._loaded_ca2n_plugins = False

    def _load_ca2n_plugins(self):
        if self._loaded_ca2n_plugins:
            return

        try:
            plugin_manager = CA2NPluginManager("ca2n")
            load_plugins(plugin_manager)
            plugin_manager.hook.ca2n_cli(cli=self)
            self._loaded_ca2n_plugins = True
        except Exception:
            logger.error(
                "Error while loading CLI Plugins", exc_info=traceback.format_exc()
            )

    def get_command(self, ctx, name):
        self._load_ca2n_plugins()
        return super(CA2NGroup, self).get_command(ctx, name)

    def list_commands(self, ctx):
        self._load_ca2n_plugins()
        return super(CA2NGroup, self).list_commands(ctx)


@click.group(cls=CA2NGroup, invoke_without_command=True)
@click.option(
    "--version",
    expose_value=False,
    callback=get_version,
    is_flag=True,
    is_eager=True,
    help="Show the ca2n version.",
)
@click.pass_context
def ca2n(ctx):
    """This is the commandline interface for ca2n."""
    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())


def stage1_modules(autoencoders):
    return {"autoencoders": autoencoders}


def _layout(config):
    return default_layout(config.resolution, config.layout)


def _checkpoint_path(path, config, name):
    return path or os.path.join(config.checkpoint_dir, name)


def _report_path(path, config, name):
    return path or os.path.join(config.report_dir, name)


def _load_split(runtime, data):
    config = runtime.config
    directory = data or config.data_dir
    manifest = load_dataset(directory, config.resolution)
    for warning in manifest.warnings:
        click.secho("[!] {}".format(warning), fg="yellow")
    train, test = split_train_test(manifest, config.split_ratio, config.seed)
    click.secho(
        "[+] Loaded {} pairs from {}: {} train, {} test".format(
            len(manifest), directory, len(train), len(test)
        ),
        fg="cyan",
    )
    return manifest, train, test


def _load_stage2(runtime, path):
    config = runtime.config
    require_file(path, "stage 2 checkpoint")
    layout = _layout(config)
    encoders = AutoencoderSet.build(layout, config).encoders()
    models = Stage2Models.build(encoders, layout, config)
    apply_tensors(models, load_checkpoint(path))
    return layout, models


def _save_interrupted(exc, models, path):
    save_checkpoint(models, path)
    raise CA2NCLIError(
        "{}; checkpoint of the state reached written to {}".format(exc, path),
        category=exc.category,
        fg="yellow",
    )


def hook_options(f):
    f = click.option("--hook-command", help="Command of the 'external' hook.")(f)
    f = click.option("--hook-radius", type=float, help="Blur radius of 'unsharp'.")(f)
    f = click.option("--hook-amount", type=float, help="Strength of 'unsharp'.")(f)
    f = click.option(
        "--hook",
        metavar="MODE",
        help="Enhancement mode: identity, unsharp, external or a plugin mode.",
    )(f)
    return f


@ca2n.command("synth-data")
@click.option(
    "--n", "count", type=click.IntRange(min=1), required=True, help="Number of pairs."
)
@seed_option
@click.option("--size", type=int, help="Frame side length (default: RESOLUTION).")
@click.option(
    "--out", type=click.Path(file_okay=False), required=True, help="Output directory."
)
@click.option("--style", type=click.Choice(STYLES), help="Sketch style.")
@config_option
@handle_errors
def synth_data(count, seed, size, out, style, config):
    """Generates synthetic face photo/sketch pairs."""
    runtime = make_runtime(config, seed, resolution=size, sketch_style=style)
    config = runtime.config
    click.secho(
        "[+] Drawing {} faces at {}x{} ({} sketches)...".format(
            count, config.resolution, config.resolution, config.sketch_style
        ),
        fg="cyan",
    )
    manifest = synth_faces(count, config.seed, config.resolution, config.sketch_style)
    save_dataset(manifest, out)
    click.secho("[+] Wrote {} pairs to {}".format(len(manifest), out), fg="green")


@ca2n.command("train-stage1")
@config_option
@seed_option
@click.option("--data", type=click.Path(file_okay=False), help="Dataset directory.")
@click.option("--out", type=click.Path(dir_okay=False), help="Checkpoint to write.")
@click.option("--epochs", type=click.IntRange(min=1), help="Epochs per component.")
@click.option(
    "--preview",
    type=click.Path(file_okay=False),
    help="Writes the reconstructions of the first training sketch here.",
)
@click.option("--log", "log_path", type=click.Path(dir_okay=False), help="Loss CSV.")
@handle_errors
def train_stage1_command(config, seed, data, out, epochs, preview, log_path):
    """Trains the five component autoencoders."""
    runtime = make_runtime(config, seed, stage1_epochs=epochs)
    config = runtime.config
    out = _checkpoint_path(out, config, STAGE1_CHECKPOINT)
    log_path = _report_path(log_path, config, "stage1_loss.csv")
    _, train, _ = _load_split(runtime, data)
    layout = _layout(config)

    click.secho(
        "[+] Training component autoencoders for {} epochs...".format(
            config.stage1_epochs
        ),
        fg="cyan",
    )
    with stop_on_signal() as stop:
        try:
            result = train_stage1(
                train.sketches(), config, layout, log_path=log_path, stop=stop
            )
        except TrainingInterrupted as exc:
            _save_interrupted(exc, stage1_modules(exc.result.autoencoders), out)

    save_checkpoint(stage1_modules(result.autoencoders), out)
    for component, history in result.history.items():
        click.echo("    {:<10} l1 {:.4f}".format(component.value, history[-1]))

    if preview:
        _write_previews(result.autoencoders, train.samples[0], layout, preview)
        click.secho("[+] Wrote reconstruction previews to {}".format(preview))
    click.secho("[+] Wrote stage 1 checkpoint {}".format(out), fg="green")


def _write_previews(autoencoders, sample, layout, directory):
    os.makedirs(directory, exist_ok=True)
    sketch = sample.sketch[None]
    write_image(sample.sketch, os.path.join(directory, "input.pgm"), sketch=True)
    for component, patch in component_reconstructions(
        autoencoders, sketch, layout
    ).items():
        path = os.path.join(directory, "{}.pgm".format(component.value))
        write_image(patch[0], path, sketch=True)
    frame = reconstruct(autoencoders, sketch, layout)
    write_image(frame[0], os.path.join(directory, "reconstruction.pgm"), sketch=True)


@ca2n.command("train-stage2")
@config_option
@seed_option
@click.option("--data", type=click.Path(file_okay=False), help="Dataset directory.")
@click.option(
    "--stage1-ckpt", type=click.Path(dir_okay=False), help="Stage 1 checkpoint."
)
@click.option("--out", type=click.Path(dir_okay=False), help="Checkpoint to write.")
@click.option("--steps", type=click.IntRange(min=1), help="Training steps.")
@click.option("--log", "log_path", type=click.Path(dir_okay=False), help="Loss CSV.")
@handle_errors
def train_stage2_command(config, seed, data, stage1_ckpt, out, steps, log_path):
    """Trains mappers, generator and discriminator and fine-tunes the
    stage 1 encoders."""
    runtime = make_runtime(config, seed, stage2_steps=steps)
    config = runtime.config
    stage1_ckpt = require_file(
        _checkpoint_path(stage1_ckpt, config, STAGE1_CHECKPOINT),
        "stage 1 checkpoint",
    )
    out = _checkpoint_path(out, config, STAGE2_CHECKPOINT)
    log_path = _report_path(log_path, config, "stage2_loss.csv")
    _, train, _ = _load_split(runtime, data)
    layout = _layout(config)
    autoencoders = AutoencoderSet.build(layout, config)
    apply_tensors(stage1_modules(autoencoders), load_checkpoint(stage1_ckpt))

    click.secho(
        "[+] Training stage 2 for {} steps...".format(config.stage2_steps), fg="cyan"
    )
    with stop_on_signal() as stop:
        try:
            result = train_stage2(
                train,
                autoencoders,
                config,
                layout=layout,
                plugin_manager=runtime.plugin_manager,
                log_path=log_path,
                stop=stop,
            )
        except TrainingInterrupted as exc:
            _save_interrupted(exc, exc.result.models, out)

    save_checkpoint(result.models, out)
    last = result.history[-1]
    click.echo(
        "    d_loss {:.4f} objective {:.4f}".format(last.d_loss, last.objective)
    )
    click.secho("[+] Wrote stage 2 checkpoint {}".format(out), fg="green")


@ca2n.command()
@config_option
@seed_option
@click.option("--ckpt", type=click.Path(dir_okay=False), help="Stage 2 checkpoint.")
@click.option(
    "--sketch",
    type=click.Path(exists=True, dir_okay=False),
    required=True,
    help="Sketch to translate (PGM).",
)
@click.option(
    "--out",
    type=click.Path(dir_okay=False),
    required=True,
    help="Output image; .ppm stays netpbm, .png and .jpg go through Pillow.",
)
@hook_options
@handle_errors
def infer(
    config, seed, ckpt, sketch, out, hook, hook_amount, hook_radius, hook_command
):
    """Turns a sketch into a photo."""
    runtime = make_runtime(
        config,
        seed,
        hook=hook,
        hook_amount=hook_amount,
        hook_radius=hook_radius,
        hook_command=hook_command,
    )
    config = runtime.config
    layout, models = _load_stage2(
        runtime, _checkpoint_path(ckpt, config, STAGE2_CHECKPOINT)
    )
    enhancement = EnhancementHook(
        HookConfig.from_config(config), runtime.plugin_manager
    )
    pipeline = Pipeline.from_models(models, layout, enhancement)

    image = pipeline.generate(read_image(sketch, expect="sketch"))
    try:
        image = pipeline.enhance(image)
    except EnhancementError as exc:
        export_image(exc.image if exc.image is not None else image, out)
        logger.warning("Kept the unenhanced image in {}".format(out))
        raise
    export_image(image, out)
    click.secho(
        "[+] Wrote {} ({} hook)".format(out, enhancement.mode), fg="green"
    )


@ca2n.command("eval")
@config_option
@seed_option
@click.option("--ckpt", type=click.Path(dir_okay=False), help="Stage 2 checkpoint.")
@click.option("--data", type=click.Path(file_okay=False), help="Dataset directory.")
@click.option("--report", type=click.Path(dir_okay=False), help="Report CSV.")
@click.option(
    "--style",
    type=click.Choice(STYLES),
    help="Redraws the test sketches in this style before translating.",
)
@click.option(
    "--all",
    "all_pairs",
    is_flag=True,
    help="Evaluates every pair, not the test split.",
)
@hook_options
@handle_errors
def evaluate_command(
    config,
    seed,
    ckpt,
    data,
    report,
    style,
    all_pairs,
    hook,
    hook_amount,
    hook_radius,
    hook_command,
):
    """Scores generated photos against the ground truth."""
    runtime = make_runtime(
        config,
        seed,
        hook=hook,
        hook_amount=hook_amount,
        hook_radius=hook_radius,
        hook_command=hook_command,
    )
    config = runtime.config
    ckpt = _checkpoint_path(ckpt, config, STAGE2_CHECKPOINT)
    report = _report_path(report, config, "eval.csv")
    layout, models = _load_stage2(runtime, ckpt)
    manifest, _, test = _load_split(runtime, data)
    if all_pairs:
        test = manifest
    if style:
        test = restyle(test, style)

    enhancement = EnhancementHook(
        HookConfig.from_config(config), runtime.plugin_manager
    )
    pipeline = Pipeline.from_models(models, layout, enhancement)
    extractor = build_feature_extractor(config, runtime.plugin_manager)
    click.secho("[+] Evaluating {} pairs...".format(len(test)), fg="cyan")
    result = evaluate(test, pipeline, extractor, config.batch_size)
    result.config = {
        "checkpoint": ckpt,
        "seed": config.seed,
        "style": style or "as stored",
        "hook": enhancement.mode,
    }
    result.write(report)

    for key, value in result.summary().items():
        click.echo("    {:<20} {}".format(key, format_value(value)))
    click.secho("[+] Wrote report {}".format(report), fg="green")


@ca2n.command()
@config_option
@seed_option
@click.option(
    "--op", "ops", multiple=True, metavar="NAME", help="Check only these (repeatable)."
)
@click.option(
    "--instances", type=click.IntRange(min=1), help="Overrides instances per check."
)
@handle_errors
def gradcheck(config, seed, ops, instances):
    """Compares analytic gradients with finite differences."""
    runtime = make_runtime(config, seed)
    cases = available_cases(runtime.plugin_manager)
    results = run_suite(runtime.config.seed, ops, cases, instances)

    for result in results:
        click.secho(
            "[{}] {:<18} {} max relative error {:.2e} over {} elements".format(
                "+" if result.passed else "!",
                result.op,
                "pass" if result.passed else "FAIL",
                result.max_error,
                result.checked,
            ),
            fg="green" if result.passed else "red",
        )
    failed = [result.op for result in results if not result.passed]
    if failed:
        raise CA2NCLIError(
            "{} of {} checks failed: {}".format(
                len(failed), len(results), ", ".join(failed)
            ),
            category="gradcheck",
            fg="red",
        )


@ca2n.command()
@config_option
@seed_option
@click.option("--data", type=click.Path(file_okay=False), help="Dataset directory.")
@click.option("--report", type=click.Path(dir_okay=False), help="Report CSV.")
@handle_errors
def ablate(config, seed, data, report):
    """Trains and evaluates every row of the ablation table."""
    runtime = make_runtime(config, seed)
    report = _report_path(report, runtime.config, "ablation.csv")
    _, train, test = _load_split(runtime, data)

    click.secho("[+] Running the ablation table...", fg="cyan")
    with stop_on_signal() as stop:
        rows = run_ablation(runtime, train, test, report, stop=stop)

    click.echo("    " + " ".join(REPORT_COLUMNS))
    for row in rows:
        click.echo("    " + " ".join(format_value(row[c]) for c in REPORT_COLUMNS))
    click.secho("[+] Wrote report {}".format(report), fg="green")
