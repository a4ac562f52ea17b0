# -*- coding: utf-8 -*-
"""
ca2n.app
~~~~~~~~

manages the runtime creation and configuration process

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import importlib
import logging
import logging.config
import logging.handlers
import os

import attr

from ca2n.plugins import spec
from ca2n.plugins.manager import CA2NPluginManager
from ca2n.utils.settings import RunConfig, load_settings

logger = logging.getLogger(__name__)

#: Modules that implement hooks of their own.
INTERNAL_PLUGINS = (
    "ca2n.stage1.attention",
    "ca2n.translator.checks",
    "ca2n.translator.enhance",
)


@attr.s
class Runtime(object):
    settings = attr.ib()
    config = attr.ib()
    plugin_manager = attr.ib()


def create_runtime(config=None, config_file=None, overrides=None, environ=None):
    """Creates the runtime.

    :param config: A config object or import string layered over the
                   default config, e.g. ``"ca2n.configs.desk.DeskConfig"``.
    :param config_file: Path to a ``key = value`` config file.
    :param overrides: Settings given on the command line; they win over
                      everything else. ``None`` values are ignored.
    :param environ: The environment to read ``CA2N_`` variables from,
                    defaults to :data:`os.environ`.
    """
    settings = load_settings(config, config_file, overrides, environ)

    # Setting up logging as early as possible
    configure_logging(settings)

    run_config = RunConfig.from_settings(settings)
    logger.info("Using config from: {}".format(config_file or config or "defaults"))

    runtime = Runtime(settings, run_config, CA2NPluginManager("ca2n"))
    load_plugins(runtime.plugin_manager)
    return runtime


def configure_logging(settings):
    """Configures logging."""
    if settings.get("USE_DEFAULT_LOGGING"):
        configure_default_logging(settings)

    if settings.get("LOG_CONF_FILE"):
        logging.config.fileConfig(
            settings["LOG_CONF_FILE"], disable_existing_loggers=False
        )


def configure_default_logging(settings):
    # Load default logging config
    logging.config.dictConfig(settings["LOG_DEFAULT_CONF"])

    if settings.get("LOG_TO_FILE"):
        configure_file_logs(settings)


def configure_file_logs(settings):
    os.makedirs(settings["LOG_PATH"], exist_ok=True)
    formatter = logging.Formatter("%(asctime)s %(levelname)-7s %(name)-25s %(message)s")
    file_handler = logging.handlers.RotatingFileHandler(
        os.path.join(settings["LOG_PATH"], "ca2n.log"),
        maxBytes=1024 * 1024,
        backupCount=5,
    )
    file_handler.setFormatter(formatter)
    logging.getLogger("ca2n").addHandler(file_handler)


def load_plugins(pluggy):
    pluggy.add_hookspecs(spec)

    for name in INTERNAL_PLUGINS:
        module = importlib.import_module(name)
        pluggy.register(module, name=name, internal=True)

    pluggy.load_setuptools_entrypoints("ca2n_plugins")
    logger.debug(
        "External plugins: {}".format(
            ", ".join(sorted(pluggy.get_name(p) for p in pluggy.get_external_plugins()))
            or "-"
        )
    )
