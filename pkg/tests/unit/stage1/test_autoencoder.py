import numpy as np
import pytest

from ca2n.core.exceptions import ValidationError
from ca2n.facelayout import ComponentId
from ca2n.numerics import Tensor
from ca2n.stage1 import (
    AutoencoderSet,
    ComponentDecoder,
    ComponentEncoder,
    decode,
    encode,
    encoder_shapes,
)
from ca2n.utils.helpers import seeded_rng


def test_encoder_shape_chain():
    assert encoder_shapes((24, 32)) == [
        (24, 32),
        (12, 16),
        (6, 8),
        (3, 4),
        (2, 2),
        (1, 1),
    ]


def test_default_latent_length():
    encoder = ComponentEncoder((24, 32), 512, seeded_rng(1, "eye"))

    latent = encode(Tensor(np.full((2, 1, 24, 32), 0.5)), encoder)

    assert latent.shape == (2, 512)
    assert np.all(np.isfinite(latent.data))
    assert encoder.fc.in_features == 256


def test_encoding_is_deterministic(rng):
    patch = Tensor(rng.uniform(size=(1, 1, 16, 16)))
    latents = [
        encode(patch, ComponentEncoder((16, 16), 8, seeded_rng(3, "nose"), (4,) * 5))
        for _ in range(2)
    ]

    np.testing.assert_array_equal(latents[0].data, latents[1].data)


def test_encoder_rejects_wrong_patch():
    encoder = ComponentEncoder((16, 16), 8, seeded_rng(3, "nose"), (4,) * 5)

    with pytest.raises(ValidationError) as excinfo:
        encoder(Tensor(np.zeros((1, 1, 16, 12))))
    assert "(1, 1, 16, 12)" in str(excinfo.value)


def test_encoder_needs_five_layers():
    with pytest.raises(ValidationError):
        ComponentEncoder((16, 16), 8, seeded_rng(3, "nose"), (4,) * 4)


def test_decoder_mirrors_encoder(rng):
    encoder = ComponentEncoder((6, 12), 8, seeded_rng(2, "mouth"), (4, 4, 8, 8, 8))
    decoder = ComponentDecoder(encoder, seeded_rng(2, "mouth", "decoder"))

    out = decode(Tensor(rng.standard_normal((3, 8)) * 10), decoder)

    assert out.shape == (3, 1, 6, 12)
    assert np.all(out.data > 0)
    assert np.all(out.data < 1)


def test_decoder_rejects_wrong_latent():
    encoder = ComponentEncoder((6, 12), 8, seeded_rng(2, "mouth"), (4,) * 5)
    decoder = ComponentDecoder(encoder, seeded_rng(2, "mouth"))

    with pytest.raises(ValidationError):
        decoder(Tensor(np.zeros((1, 7))))


def test_autoencoder_set_shapes(config, layout):
    autoencoders = AutoencoderSet.build(layout, config)
    sketch = np.zeros((2, 1, 32, 32))

    for component in ComponentId:
        box = layout[component]
        patch = Tensor(sketch[:, :, box.y:box.y + box.h, box.x:box.x + box.w])
        latent = autoencoders[component].encoder(patch)
        assert latent.shape == (2, config.latent_dim)
        assert autoencoders[component].decoder(latent).shape == patch.shape


def test_cbam_disabled_has_no_attention_tensors(config, layout):
    enabled = AutoencoderSet.build(layout, config)
    disabled = AutoencoderSet.build(layout, config.replace(cbam=False))

    assert any(".cbam." in name for name, _ in enabled.named_parameters())
    assert not any(".cbam." in name for name, _ in disabled.named_parameters())
    assert disabled.parameter_count() < enabled.parameter_count()


def test_cbam_layer_toggle(config, layout):
    config = config.replace(cbam_layers=(True, False, False, False, True))
    autoencoders = AutoencoderSet.build(layout, config)

    blocks = {
        name.split(".")[3]
        for name, _ in autoencoders.named_parameters()
        if name.startswith("nose.encoder.blocks.") and ".cbam." in name
    }
    assert blocks == {"0", "4"}


def test_parameter_names_are_prefixed_by_component(config, layout):
    autoencoders = AutoencoderSet.build(layout, config)
    names = [name for name, _ in autoencoders.named_parameters()]

    assert {name.split(".")[0] for name in names} == {c.value for c in ComponentId}
    assert "left_eye.encoder.fc.weight" in names
