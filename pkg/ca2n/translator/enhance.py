# -*- coding: utf-8 -*-
"""
ca2n.translator.enhance
~~~~~~~~~~~~~~~~~~~~~~~

Inference-only post-processing of generated images. Built-in modes are
``identity``, ``unsharp`` and ``external``; plugins add more through the
``ca2n_enhancement_modes`` hook.

An external command is run as ``<cmd> <input.ppm> <output.ppm>`` and
must exit with status 0.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import logging
import os
import subprocess
import tempfile

import attr
import numpy as np
from scipy.ndimage import gaussian_filter

from ..core.exceptions import ConfigurationError, DecodeError, EnhancementError
from ..dataio.netpbm import read_image, write_image
from ..plugins import impl

logger = logging.getLogger(__name__)


@attr.s(frozen=True)
class HookConfig(object):
    mode = attr.ib(default="identity")
    amount = attr.ib(default=1.0)
    radius = attr.ib(default=1.0)
    command = attr.ib(default=None)
    timeout = attr.ib(default=300)

    @classmethod
    def from_config(cls, config):
        """Builds the hook configuration of a run. With the IE flag off
        the hook is always the identity."""
        if not config.ie:
            return cls()
        return cls(
            mode=config.hook,
            amount=config.hook_amount,
            radius=config.hook_radius,
            command=config.hook_command,
            timeout=config.hook_timeout,
        )


def identity(image, **params):
    return image.copy()


def unsharp(image, amount=1.0, radius=1.0, **params):
    """Adds ``amount`` times the difference to a Gaussian blurred copy
    with standard deviation ``radius`` (in pixels)."""
    if amount == 0:
        return image.copy()
    sigma = (0,) * (image.ndim - 2) + (radius, radius)
    blurred = gaussian_filter(image.astype(np.float64), sigma=sigma, mode="nearest")
    sharpened = image + amount * (image - blurred)
    return np.clip(sharpened, 0.0, 1.0).astype(image.dtype)


def _run_command(image, command, timeout):
    with tempfile.TemporaryDirectory(prefix="ca2n-hook-") as tmpdir:
        source = os.path.join(tmpdir, "input.ppm")
        target = os.path.join(tmpdir, "output.ppm")
        write_image(image, source)
        try:
            completed = subprocess.run(
                [command, source, target],
                capture_output=True,
                text=True,
                timeout=timeout,
            )
        except (OSError, subprocess.SubprocessError) as exc:
            raise EnhancementError(
                "cannot run enhancement command {!r}".format(command),
                diagnostics=str(exc),
                image=image,
            )
        if completed.returncode != 0:
            raise EnhancementError(
                "enhancement command exited with status {}".format(
                    completed.returncode
                ),
                diagnostics=(completed.stderr or "") + (completed.stdout or ""),
                image=image,
            )
        try:
            return read_image(target, expect="photo")
        except (OSError, DecodeError) as exc:
            raise EnhancementError(
                "enhancement command produced no readable image",
                diagnostics=str(exc),
                image=image,
            )


def external(image, command=None, timeout=300, **params):
    """Runs ``command`` on every image of ``image`` (``[3, S, S]`` or
    ``[N, 3, S, S]``)."""
    if not command:
        raise ConfigurationError("the external hook needs a command")
    if image.ndim == 3:
        return _run_command(image, command, timeout)
    return np.stack([_run_command(single, command, timeout) for single in image])


BUILTIN_MODES = {"identity": identity, "unsharp": unsharp, "external": external}


@impl
def ca2n_enhancement_modes():
    return dict(BUILTIN_MODES)


class EnhancementHook(object):
    """Applies the configured post-processing to generated images.

    :param config: A :class:`HookConfig`.
    :param plugin_manager: Source of additional modes, optional.
    """

    def __init__(self, config=None, plugin_manager=None):
        self.config = config or HookConfig()
        modes = dict(BUILTIN_MODES)
        if plugin_manager is not None:
            modes.update(plugin_manager.collect("ca2n_enhancement_modes"))
        if self.config.mode not in modes:
            raise ConfigurationError(
                "unknown enhancement mode {!r}; available: {}".format(
                    self.config.mode, ", ".join(sorted(modes))
                )
            )
        self._apply = modes[self.config.mode]

    @property
    def mode(self):
        return self.config.mode

    @property
    def is_identity(self):
        return self.config.mode == "identity"

    def __call__(self, image):
        """Returns the enhanced copy of ``image``, same shape and within
        ``[0, 1]``.

        :raises EnhancementError: when the mode fails; ``exc.image`` is
            the unenhanced input.
        """
        image = np.asarray(image)
        result = np.asarray(
            self._apply(
                image,
                amount=self.config.amount,
                radius=self.config.radius,
                command=self.config.command,
                timeout=self.config.timeout,
            )
        )
        if result.shape != image.shape:
            raise EnhancementError(
                "enhancement mode {!r} changed the image shape from {} to {}".format(
                    self.mode, image.shape, result.shape
                ),
                image=image,
            )
        return np.clip(result, 0.0, 1.0).astype(image.dtype, copy=False)
