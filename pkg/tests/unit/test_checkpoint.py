import os
import struct
import zlib

import numpy as np
import pytest

from ca2n.checkpoint import (
    MAGIC,
    apply_tensors,
    collect_tensors,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from ca2n.core.exceptions import CheckpointError
from ca2n.stage1 import AutoencoderSet
from ca2n.translator.training import Stage2Models


def _with_crc(payload):
    return payload + struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF)


@pytest.fixture
def tensors(rng):
    return {
        "generator.blocks.0.weight": rng.normal(size=(4, 3, 3, 3)).astype("f4"),
        "generator.blocks.0.bias": np.zeros(4, dtype="f4"),
        "discriminator.scale": np.array(1.5, dtype="f4"),
    }


def test_encode_and_decode(tensors):
    data = encode_checkpoint(tensors)

    assert data[:4] == MAGIC
    decoded = decode_checkpoint(data)
    assert list(decoded) == list(tensors)
    for name, array in tensors.items():
        assert decoded[name].shape == array.shape
        assert decoded[name].tobytes() == array.tobytes()


def test_stage1_round_trip(config, layout, tmp_path):
    trained = AutoencoderSet.build(layout, config)
    path = str(tmp_path / "ckpt" / "stage1.ckpt")

    save_checkpoint({"autoencoders": trained}, path)
    fresh = AutoencoderSet.build(layout, config.replace(seed=99))
    apply_tensors({"autoencoders": fresh}, load_checkpoint(path))

    assert not os.path.exists(path + ".partial")
    expected = trained.state()
    actual = fresh.state()
    assert list(actual) == list(expected)
    for name in expected:
        assert actual[name].tobytes() == expected[name].tobytes()


def test_stage2_round_trip(stage2_models, config, layout, tmp_path):
    path = str(tmp_path / "stage2.ckpt")

    save_checkpoint(stage2_models, path)
    other = config.replace(seed=5)
    fresh = Stage2Models.build(
        AutoencoderSet.build(layout, other).encoders(), layout, other
    )
    apply_tensors(fresh, load_checkpoint(path))

    expected = collect_tensors(stage2_models)
    assert {name.split(".")[0] for name in expected} == {
        "encoders",
        "mappers",
        "generator",
        "discriminator",
    }
    actual = collect_tensors(fresh)
    for name in expected:
        np.testing.assert_array_equal(actual[name], expected[name])


def test_corrupted_byte(tensors):
    data = bytearray(encode_checkpoint(tensors))
    data[40] ^= 0xFF

    with pytest.raises(CheckpointError) as excinfo:
        decode_checkpoint(bytes(data), path="model.ckpt")
    assert "CRC mismatch" in str(excinfo.value)
    assert "model.ckpt" in str(excinfo.value)


def test_truncated_file(tensors):
    data = encode_checkpoint(tensors)

    with pytest.raises(CheckpointError) as excinfo:
        decode_checkpoint(data[:10])
    assert "truncated" in str(excinfo.value)

    with pytest.raises(CheckpointError) as excinfo:
        decode_checkpoint(_with_crc(data[:-8]))
    assert "truncated while reading data of" in str(excinfo.value)


def test_unknown_version(tensors):
    payload = encode_checkpoint(tensors)[:-4]
    payload = payload[:4] + struct.pack("<I", 2) + payload[8:]

    with pytest.raises(CheckpointError) as excinfo:
        decode_checkpoint(_with_crc(payload))
    assert "unknown format version 2" in str(excinfo.value)


def test_not_a_checkpoint():
    with pytest.raises(CheckpointError) as excinfo:
        decode_checkpoint(b"PK\x03\x04" + b"\x00" * 20)
    assert "not a ca2n checkpoint" in str(excinfo.value)


def test_trailing_bytes(tensors):
    payload = encode_checkpoint(tensors)[:-4] + b"\x00\x00"

    with pytest.raises(CheckpointError) as excinfo:
        decode_checkpoint(_with_crc(payload))
    assert "2 unexpected trailing bytes" in str(excinfo.value)


def test_cbam_mismatch(config, layout, tmp_path):
    path = str(tmp_path / "stage1.ckpt")
    save_checkpoint({"autoencoders": AutoencoderSet.build(layout, config)}, path)
    plain = AutoencoderSet.build(layout, config.replace(cbam=False))

    with pytest.raises(CheckpointError) as excinfo:
        apply_tensors({"autoencoders": plain}, load_checkpoint(path))

    message = str(excinfo.value)
    assert "does not match the configured models" in message
    assert "unexpected: autoencoders.left_eye.encoder." in message
    assert ".cbam." in message
    assert "missing: -" in message


def test_shape_mismatch(config, layout, tmp_path):
    path = str(tmp_path / "stage1.ckpt")
    save_checkpoint({"autoencoders": AutoencoderSet.build(layout, config)}, path)
    wider = AutoencoderSet.build(layout, config.replace(latent_dim=16))

    with pytest.raises(CheckpointError) as excinfo:
        apply_tensors({"autoencoders": wider}, load_checkpoint(path))
    assert "does not match parameter shape" in str(excinfo.value)


def test_non_finite_values(tmp_path):
    path = str(tmp_path / "bad.ckpt")

    with pytest.raises(CheckpointError) as excinfo:
        save_checkpoint({"weight": np.array([1.0, np.inf])}, path)
    assert "weight" in str(excinfo.value)
    assert not os.path.exists(path)


def test_missing_file(tmp_path):
    with pytest.raises(CheckpointError) as excinfo:
        load_checkpoint(str(tmp_path / "absent.ckpt"))
    assert "cannot read" in str(excinfo.value)
