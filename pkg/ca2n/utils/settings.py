# -*- coding: utf-8 -*-
"""
ca2n.utils.settings
~~~~~~~~~~~~~~~~~~~

This module contains the interface for interacting with ca2n's
configuration: a dict-like :class:`Settings` object layered from the
default config, a config file, the environment and command line flags,
and the validated :class:`RunConfig` the pipeline reads.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import ast
import importlib
import logging
from collections.abc import MutableMapping

import attr

from ..core.exceptions import ConfigurationError
from .helpers import config_from_env

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = "ca2n.configs.default.DefaultConfig"


def import_string(import_name):
    """Imports an object given as ``"package.module.Object"``."""
    module_name, _, obj_name = import_name.rpartition(".")
    try:
        return getattr(importlib.import_module(module_name), obj_name)
    except (ImportError, AttributeError, ValueError) as exc:
        raise ConfigurationError(
            "cannot import config object {!r}: {}".format(import_name, exc)
        )


class Settings(MutableMapping):
    """Provides a dictionary like interface for interacting with ca2n's
    configuration. Keys are case-insensitive and stored upper-case.
    """

    def __init__(self, *args, **kwargs):
        self._data = {}
        self.update(dict(*args, **kwargs))

    def __getitem__(self, key):
        return self._data[key.upper()]

    def __setitem__(self, key, value):
        self._data[key.upper()] = value

    def __delitem__(self, key):
        del self._data[key.upper()]

    def __iter__(self):
        return iter(self._data)

    def __len__(self):
        return len(self._data)

    def __repr__(self):
        return "<Settings {!r}>".format(self._data)

    def from_object(self, obj):
        """Updates the values from the upper-case attributes of ``obj``,
        which may also be given as an import string."""
        if isinstance(obj, str):
            obj = import_string(obj)
        for key in dir(obj):
            if key.isupper():
                self[key] = getattr(obj, key)

    def from_file(self, path):
        """Updates the values from a ``key = value`` config file. Only
        keys that are already known are accepted."""
        for key, value in read_config_file(path).items():
            if key not in self:
                raise ConfigurationError(
                    "{}: unknown configuration key {!r}".format(path, key.lower())
                )
            self[key] = value

    def from_env(self, prefix="CA2N_", environ=None):
        """Updates the values from ``CA2N_`` prefixed environment
        variables. Unknown names are ignored with a warning."""
        for key, value in config_from_env(prefix, environ).items():
            if key.upper() not in self:
                logger.warning("Ignoring unknown setting {}{}".format(prefix, key))
                continue
            self[key] = value


def parse_value(raw):
    """Parses a config value as a python literal, falling back to the
    raw string."""
    raw = raw.strip()
    try:
        return ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        return raw


def read_config_file(path):
    """Reads a flat config file::

        # stage 1
        resolution = 64
        encoder_channels = (16, 32, 64, 64, 64)
        hook = unsharp

    :returns: ``{KEY: value}`` with upper-cased keys.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigurationError("cannot read config file {}: {}".format(path, exc))

    values = {}
    for number, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigurationError(
                "{}:{}: expected 'key = value', got {!r}".format(path, number, line)
            )
        values[key.upper()] = parse_value(value)
    return values


def load_settings(config=None, config_file=None, overrides=None, environ=None):
    """Layers the configuration, lowest to highest: the default config,
    ``config`` (object or import string), the config file, ``CA2N_``
    environment variables and finally ``overrides`` (command line flags).
    ``None`` valued overrides are skipped.
    """
    settings = Settings()
    settings.from_object(DEFAULT_CONFIG)
    if config is not None:
        settings.from_object(config)
    if config_file is not None:
        settings.from_file(config_file)
        settings["CONFIG_PATH"] = config_file
    settings.from_env(environ=environ)
    for key, value in (overrides or {}).items():
        if value is not None:
            settings[key] = value
    return settings


def _positive_int(instance, attribute, value):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ValueError("{} must be a positive integer".format(attribute.name))


def _non_negative(instance, attribute, value):
    if value < 0:
        raise ValueError("{} must not be negative".format(attribute.name))


def _channels(count):
    def validate(instance, attribute, value):
        if len(value) != count or any(
            not isinstance(v, int) or v < 1 for v in value
        ):
            raise ValueError(
                "{} must be {} positive integers".format(attribute.name, count)
            )

    return validate


def _optional_int(instance, attribute, value):
    if value is not None and (isinstance(value, bool) or not isinstance(value, int)):
        raise ValueError("{} must be an integer".format(attribute.name))


def _setting(default=attr.NOTHING, key=None, **kwargs):
    metadata = {"setting": key} if key else {}
    return attr.ib(default=default, metadata=metadata, **kwargs)


@attr.s(frozen=True)
class RunConfig(object):
    """The validated, immutable configuration of one run.

    Build it with :meth:`from_settings`; field names are the lower-cased
    setting keys unless noted.
    """

    seed = _setting(None, validator=_optional_int)

    resolution = _setting(128, validator=_positive_int)
    layout = _setting(None)

    latent_dim = _setting(512, validator=_positive_int)
    encoder_channels = _setting((32, 64, 128, 256, 256), converter=tuple)
    leaky_slope = _setting(0.2, validator=_non_negative)
    cbam = _setting(True, converter=bool)
    cbam_layers = _setting((True,) * 5, converter=tuple)
    cbam_reduction = _setting(8, validator=_positive_int)
    cbam_kernel = _setting(7, validator=_positive_int)
    stage1_epochs = _setting(50, validator=_positive_int)

    mapper_channels = _setting((256, 256, 128, 64), converter=tuple)
    feature_channels = _setting(32, validator=_positive_int)
    generator_channels = _setting((32, 64, 128), converter=tuple)
    generator_residual_blocks = _setting(3, validator=_non_negative)
    discriminator_channels = _setting((32, 64, 128, 128), converter=tuple)
    discriminator_sketch = _setting(False, converter=bool)
    stage2_steps = _setting(2000, validator=_positive_int)
    extractor_channels = _setting((16, 32, 64, 64), converter=tuple)

    noise_epsilon = _setting(0.05, converter=float)

    w_content = _setting(100.0, converter=float, validator=_non_negative)
    w_adv = _setting(1.0, converter=float, validator=_non_negative)
    w_perc = _setting(1.0, converter=float, validator=_non_negative)
    w_induced = _setting(1.0, converter=float, validator=_non_negative)
    w_str = _setting(1.0, converter=float, validator=_non_negative)

    da = _setting(True, converter=bool)
    gl = _setting(True, converter=bool)
    ie = _setting(True, converter=bool)
    loss_induced = _setting(True, converter=bool)
    loss_perceptual = _setting(True, converter=bool)
    loss_structural = _setting(True, converter=bool)

    batch_size = _setting(8, validator=_positive_int)
    learning_rate = _setting(2e-4, converter=float)
    beta1 = _setting(0.9, key="ADAM_BETA1", converter=float)
    beta2 = _setting(0.999, key="ADAM_BETA2", converter=float)
    adam_eps = _setting(1e-8, converter=float)
    log_interval = _setting(10, validator=_positive_int)
    threads = _setting(1, validator=_positive_int)

    split_ratio = _setting((10, 1), converter=tuple)
    sketch_style = _setting("dog")
    data_dir = _setting("data")
    checkpoint_dir = _setting("checkpoints")
    report_dir = _setting("reports")

    hook = _setting("identity")
    hook_amount = _setting(1.0, converter=float, validator=_non_negative)
    hook_radius = _setting(1.0, converter=float, validator=_non_negative)
    hook_command = _setting(None)
    hook_timeout = _setting(300, validator=_positive_int)
    ablation_hook = _setting("unsharp")

    @resolution.validator
    def _check_resolution(self, attribute, value):
        if value < 32 or value % 4:
            raise ValueError(
                "resolution must be >= 32 and divisible by 4, got {}".format(value)
            )

    @encoder_channels.validator
    def _check_encoder_channels(self, attribute, value):
        _channels(5)(self, attribute, value)

    @cbam_layers.validator
    def _check_cbam_layers(self, attribute, value):
        if len(value) != 5:
            raise ValueError("cbam_layers must hold 5 flags")

    @cbam_kernel.validator
    def _check_cbam_kernel(self, attribute, value):
        if value % 2 != 1:
            raise ValueError("cbam_kernel must be odd, got {}".format(value))

    @mapper_channels.validator
    def _check_mapper_channels(self, attribute, value):
        _channels(4)(self, attribute, value)

    @generator_channels.validator
    def _check_generator_channels(self, attribute, value):
        _channels(3)(self, attribute, value)

    @discriminator_channels.validator
    def _check_discriminator_channels(self, attribute, value):
        _channels(4)(self, attribute, value)

    @extractor_channels.validator
    def _check_extractor_channels(self, attribute, value):
        _channels(4)(self, attribute, value)

    @noise_epsilon.validator
    def _check_epsilon(self, attribute, value):
        if not 0 < value <= 0.25:
            raise ValueError("noise_epsilon must be in (0, 0.25], got {}".format(value))

    @w_str.validator
    def _check_any_weight(self, attribute, value):
        if not any(
            (self.w_content, self.w_adv, self.w_perc, self.w_induced, self.w_str)
        ):
            raise ValueError("at least one loss weight must be positive")

    @learning_rate.validator
    def _check_learning_rate(self, attribute, value):
        if value <= 0:
            raise ValueError("learning_rate must be positive")

    @ablation_hook.validator
    def _check_ablation_hook(self, attribute, value):
        if value == "identity":
            raise ValueError("ablation_hook must not be the identity")

    @split_ratio.validator
    def _check_split_ratio(self, attribute, value):
        if len(value) != 2:
            raise ValueError("split_ratio must be two integers train:test")
        for part in value:
            _positive_int(self, attribute, part)

    @classmethod
    def setting_keys(cls):
        """Maps field names to their setting keys."""
        return {
            a.name: a.metadata.get("setting", a.name.upper()) for a in attr.fields(cls)
        }

    @classmethod
    def from_settings(cls, settings):
        """Builds a :class:`RunConfig` from a :class:`Settings` mapping.

        :raises ConfigurationError: when a value is invalid.
        """
        values = {
            name: settings[key]
            for name, key in cls.setting_keys().items()
            if key in settings
        }
        try:
            return cls(**values)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(str(exc))

    def replace(self, **changes):
        """Returns a copy with ``changes`` applied and validated."""
        try:
            return attr.evolve(self, **changes)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(str(exc))
