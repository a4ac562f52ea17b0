# -*- coding: utf-8 -*-
"""
ca2n.translator.checks
~~~~~~~~~~~~~~~~~~~~~~

Gradient check of the complete stage 2 objective, from the encoder
weights through mapping, generation and all five loss terms.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

from ..facelayout import default_layout
from ..losses import TERMS, FeatureExtractor, LossWeights, global_objective
from ..numerics import Tensor
from ..numerics.gradcheck import GradcheckCase
from ..plugins import impl
from ..stage1.autoencoder import AutoencoderSet
from ..utils.settings import RunConfig
from .inference import Pipeline
from .noise import FixedNoise
from .training import Stage2Models, generator_terms

TINY = dict(
    resolution=32,
    latent_dim=4,
    encoder_channels=(4, 4, 4, 4, 4),
    cbam_reduction=2,
    cbam_kernel=3,
    mapper_channels=(4, 4, 4, 4),
    feature_channels=4,
    generator_channels=(4, 4, 4),
    generator_residual_blocks=1,
    discriminator_channels=(4, 4, 4, 4),
    extractor_channels=(4, 4, 4, 4),
)


def _build_stage2_objective(rng):
    config = RunConfig(seed=int(rng.integers(2 ** 31)), **TINY)
    layout = default_layout(config.resolution)
    encoders = AutoencoderSet.build(layout, config).encoders()
    models = Stage2Models.build(encoders, layout, config)
    pipeline = Pipeline.from_models(models, layout)
    extractor = FeatureExtractor(config.seed, config.extractor_channels)
    noise = FixedNoise(rng.uniform(-1.0, 1.0, (2, 3, 32, 32)), epsilon=0.05)
    weights = LossWeights.from_config(config)
    sketch = Tensor(rng.uniform(0.0, 1.0, (2, 1, 32, 32)))
    photo = Tensor(rng.uniform(0.05, 0.95, (2, 3, 32, 32)))

    def fn(*params):
        fake = pipeline.translate(sketch)
        terms = generator_terms(
            fake, photo, models.discriminator(fake), TERMS, extractor, noise
        )
        return global_objective(terms, weights)[0]

    return fn, list(models.generator_parameters().values())


@impl
def ca2n_gradcheck_cases():
    return {
        "stage2_objective": GradcheckCase(
            _build_stage2_objective, tolerance=1e-3, instances=1, sample=0.01
        )
    }
