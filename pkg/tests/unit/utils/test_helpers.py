# -*- coding: utf-8 -*-
import numpy as np
import pytest

from ca2n.utils.helpers import config_from_env, ensure_dir, seeded_rng, to_bytes
from ca2n.utils.runlog import LossLog, format_value, stage2_columns


def test_seeded_rng_is_reproducible():
    a = seeded_rng(7, "stage1", "left_eye").uniform(size=5)
    b = seeded_rng(7, "stage1", "left_eye").uniform(size=5)

    np.testing.assert_array_equal(a, b)


def test_seeded_rng_labels_are_independent():
    a = seeded_rng(7, "stage1", "left_eye").uniform(size=5)
    b = seeded_rng(7, "stage1", "right_eye").uniform(size=5)
    c = seeded_rng(8, "stage1", "left_eye").uniform(size=5)

    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_to_bytes():
    assert to_bytes("abc") == b"abc"
    assert to_bytes(b"abc") == b"abc"


def test_config_from_env():
    environ = {
        "CA2N_BATCH_SIZE": "8",
        "CA2N_HOOK": "unsharp",
        "CA2N_ENCODER_CHANNELS": "(8, 8, 16, 16, 16)",
        "PATH": "/usr/bin",
    }

    assert config_from_env("CA2N_", environ) == {
        "BATCH_SIZE": 8,
        "HOOK": "unsharp",
        "ENCODER_CHANNELS": (8, 8, 16, 16, 16),
    }


def test_ensure_dir(tmp_path):
    target = tmp_path / "a" / "b"

    assert ensure_dir(str(target)) == str(target)
    assert target.is_dir()
    # a second call is fine
    ensure_dir(str(target))


def test_format_value():
    assert format_value(None) == ""
    assert format_value(True) == "true"
    assert format_value("unavailable") == "unavailable"
    assert format_value(float("inf")) == "inf"
    assert format_value(0.5) == "0.5"
    assert format_value(3) == "3"
    assert format_value(np.float32(0.25)) == "0.25"


def test_loss_log(tmp_path):
    path = tmp_path / "logs" / "stage2.csv"
    log = LossLog(str(path), stage2_columns(["content", "induced"]))

    log.write(step=0, d_loss=1.5, objective=2.0, content_raw=0.5)

    lines = path.read_text().splitlines()
    assert lines[0] == (
        "step,d_loss,objective,content_raw,content_weighted,"
        "induced_raw,induced_weighted,induced_grad_norm"
    )
    assert lines[1] == "0,1.5,2.0,0.5,,,,"
    assert log.rows == [["0", "1.5", "2.0", "0.5", "", "", "", ""]]


def test_loss_log_unknown_column():
    log = LossLog(None, ["step"])

    with pytest.raises(KeyError) as excinfo:
        log.write(step=1, bogus=2)
    assert "bogus" in str(excinfo.value)
