# -*- coding: utf-8 -*-
"""
ca2n.cli.utils
~~~~~~~~~~~~~~

This module contains some utility helpers that are used across
commands.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import functools
import logging
import os
import signal
import sys
import threading
from contextlib import contextmanager

import click
import numpy as np

from ca2n import __version__
from ca2n.app import create_runtime
from ca2n.core.exceptions import BaseCA2NError, ConfigurationError

logger = logging.getLogger(__name__)


class CA2NCLIError(click.ClickException):
    """An exception that prints a single ``error: <category>: <message>``
    line and exits with status 1.

    :param category: Machine-parsable failure category.
    :param styles: The style kwargs which should be forwarded to click.secho.
    """

    def __init__(self, message, category="error", **styles):
        click.ClickException.__init__(self, message)
        self.category = category
        self.styles = styles

    @classmethod
    def from_error(cls, error):
        return cls(str(error), category=error.category, fg="red")

    def show(self, file=None):
        if file is None:
            file = click.get_text_stream("stderr")
        click.secho(
            "error: {}: {}".format(self.category, self.format_message()),
            file=file,
            **self.styles
        )


def handle_errors(f):
    """Turns ca2n exceptions raised by a command into :class:`CA2NCLIError`."""

    @functools.wraps(f)
    def decorator(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except BaseCA2NError as exc:
            logger.debug("Command failed", exc_info=True)
            raise CA2NCLIError.from_error(exc)

    return decorator


def config_option(f):
    return click.option(
        "--config",
        "config",
        metavar="CONFIG",
        help="Specify the config to use either in dotted module "
        "notation e.g. 'ca2n.configs.desk.DeskConfig' "
        "or by using a path like '/path/to/ca2n.cfg'",
    )(f)


def seed_option(f):
    return click.option(
        "--seed",
        type=int,
        help="Seed of every random stream; required unless SEED is set "
        "in the config.",
    )(f)


def split_config(config):
    """Returns ``(config object, config file)`` for a ``--config`` value."""
    if config is None:
        return None, None
    if os.path.exists(config) or config.endswith(".cfg"):
        return None, config
    return config, None


def make_runtime(config=None, seed=None, **overrides):
    """Creates the runtime for a command and enforces the seed.

    :param overrides: lower-cased setting names given on the command line.
    """
    config_object, config_file = split_config(config)
    settings = {key.upper(): value for key, value in overrides.items()}
    settings["SEED"] = seed
    try:
        runtime = create_runtime(config_object, config_file, settings)
    except ImportError as exc:
        raise CA2NCLIError(
            "cannot import config {}: {}".format(config, exc),
            category=ConfigurationError.category,
            fg="red",
        )
    if runtime.config.seed is None:
        raise click.UsageError(
            "a seed is required; pass --seed or set SEED in the config file"
        )
    return runtime


@contextmanager
def stop_on_signal():
    """Yields an event that is set on SIGINT or SIGTERM. Training loops
    check it at step boundaries."""
    stop = threading.Event()
    installed = {}

    def handler(signum, frame):
        logger.warning("Received signal {}, stopping".format(signum))
        stop.set()

    if threading.current_thread() is threading.main_thread():
        for signum in (signal.SIGINT, signal.SIGTERM):
            installed[signum] = signal.signal(signum, handler)
    try:
        yield stop
    finally:
        for signum, previous in installed.items():
            signal.signal(signum, previous)


def require_file(path, what):
    if not path or not os.path.isfile(path):
        raise ConfigurationError("{} not found: {}".format(what, path))
    return path


def get_version(ctx, param, value):
    if not value or ctx.resilient_parsing:
        return
    message = (
        "ca2n %(version)s using numpy %(numpy_version)s on "
        "Python %(python_version)s"
    )
    click.echo(
        message
        % {
            "version": __version__,
            "numpy_version": np.__version__,
            "python_version": sys.version.split("\n")[0],
        },
        color=ctx.color,
    )
    ctx.exit()
