import pytest

from ca2n.app import create_runtime
from ca2n.configs.testing import TestingConfig
from ca2n.facelayout import default_layout
from ca2n.stage1 import AutoencoderSet
from ca2n.translator.training import Stage2Models


@pytest.fixture()
def runtime():
    """runtime built from the testing config, ignoring the environment."""
    return create_runtime(TestingConfig, environ={})


@pytest.fixture()
def config(runtime):
    return runtime.config


@pytest.fixture()
def layout(config):
    return default_layout(config.resolution, config.layout)


@pytest.fixture()
def stage2_models(config, layout):
    """untrained stage 2 networks around freshly initialised encoders."""
    encoders = AutoencoderSet.build(layout, config).encoders()
    return Stage2Models.build(encoders, layout, config)
