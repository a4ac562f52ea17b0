import subprocess

import numpy as np
import pytest

from ca2n.core.exceptions import ConfigurationError, EnhancementError
from ca2n.dataio.netpbm import read_image, write_image
from ca2n.plugins import impl
from ca2n.translator.enhance import EnhancementHook, HookConfig, identity, unsharp


@pytest.fixture
def image(rng):
    return rng.uniform(size=(3, 16, 16))


def test_identity_copies(image):
    out = identity(image)

    np.testing.assert_array_equal(out, image)
    assert out is not image


def test_unsharp_amount_zero(image):
    np.testing.assert_array_equal(unsharp(image, amount=0.0), image)


def test_unsharp_keeps_flat_images():
    flat = np.full((3, 8, 8), 0.4)

    np.testing.assert_allclose(unsharp(flat, amount=2.0, radius=1.5), flat)


def test_unsharp_raises_edge_contrast():
    step = np.zeros((1, 3, 12, 12))
    step[..., 6:] = 0.6
    step[..., :6] = 0.3

    out = unsharp(step, amount=1.0, radius=1.0)

    assert out.shape == step.shape
    assert out[0, 0, 5, 5] < 0.3
    assert out[0, 0, 5, 6] > 0.6
    assert np.all((out >= 0) & (out <= 1))


def test_hook_config_without_ie(config):
    settings = config.replace(ie=False, hook="unsharp")

    assert HookConfig.from_config(settings) == HookConfig()
    assert HookConfig.from_config(config.replace(hook="unsharp")).mode == "unsharp"


def test_unknown_mode():
    with pytest.raises(ConfigurationError) as excinfo:
        EnhancementHook(HookConfig(mode="restore"))
    assert "identity" in str(excinfo.value)


def test_hook_output_is_clipped(image):
    hook = EnhancementHook(HookConfig(mode="unsharp", amount=5.0))

    out = hook(image)

    assert out.shape == image.shape
    assert out.dtype == image.dtype
    assert out.min() >= 0 and out.max() <= 1


def test_plugin_mode(plugin_manager, image):
    class Invert(object):
        @impl
        def ca2n_enhancement_modes(self):
            return {"invert": lambda image, **params: 1.0 - image}

    plugin_manager.register(Invert())
    hook = EnhancementHook(HookConfig(mode="invert"), plugin_manager)

    np.testing.assert_allclose(hook(image), 1.0 - image)


def test_mode_changing_the_shape(plugin_manager, image):
    class Crop(object):
        @impl
        def ca2n_enhancement_modes(self):
            return {"crop": lambda image, **params: image[..., 1:, 1:]}

    plugin_manager.register(Crop())
    hook = EnhancementHook(HookConfig(mode="crop"), plugin_manager)

    with pytest.raises(EnhancementError) as excinfo:
        hook(image)
    assert excinfo.value.image is not None


def _invert_files(args, **kwargs):
    _, source, target = args
    write_image(1.0 - read_image(source, expect="photo"), target)
    return subprocess.CompletedProcess(args, 0, "", "")


def test_external_command(mocker):
    run = mocker.patch(
        "ca2n.translator.enhance.subprocess.run", side_effect=_invert_files
    )
    image = np.full((3, 4, 4), 0.2)
    hook = EnhancementHook(HookConfig(mode="external", command="restore-faces"))

    out = hook(image)

    np.testing.assert_allclose(out, 0.8, atol=1 / 255.0)
    args = run.call_args[0][0]
    assert args[0] == "restore-faces"
    assert args[1].endswith("input.ppm")


def test_external_command_batch(mocker):
    run = mocker.patch(
        "ca2n.translator.enhance.subprocess.run", side_effect=_invert_files
    )
    hook = EnhancementHook(HookConfig(mode="external", command="restore-faces"))

    out = hook(np.zeros((2, 3, 4, 4)))

    assert out.shape == (2, 3, 4, 4)
    assert run.call_count == 2


def test_external_command_fails(mocker, image):
    mocker.patch(
        "ca2n.translator.enhance.subprocess.run",
        return_value=subprocess.CompletedProcess([], 3, "", "model not found\n"),
    )
    hook = EnhancementHook(HookConfig(mode="external", command="restore-faces"))

    with pytest.raises(EnhancementError) as excinfo:
        hook(image)

    error = excinfo.value
    assert error.category == "enhancement"
    assert "status 3" in str(error)
    assert "model not found" in error.diagnostics
    np.testing.assert_array_equal(error.image, image)


def test_external_command_missing(mocker, image):
    mocker.patch(
        "ca2n.translator.enhance.subprocess.run",
        side_effect=FileNotFoundError("no such file"),
    )
    hook = EnhancementHook(HookConfig(mode="external", command="restore-faces"))

    with pytest.raises(EnhancementError) as excinfo:
        hook(image)
    assert "no such file" in excinfo.value.diagnostics


def test_external_command_without_output(mocker, image):
    mocker.patch(
        "ca2n.translator.enhance.subprocess.run",
        return_value=subprocess.CompletedProcess([], 0, "", ""),
    )
    hook = EnhancementHook(HookConfig(mode="external", command="restore-faces"))

    with pytest.raises(EnhancementError) as excinfo:
        hook(image)
    assert "no readable image" in str(excinfo.value)


def test_external_needs_command(image):
    hook = EnhancementHook(HookConfig(mode="external"))

    with pytest.raises(ConfigurationError):
        hook(image)
