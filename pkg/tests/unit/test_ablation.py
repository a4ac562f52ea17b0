import csv
import logging
import threading

import pytest

from ca2n.ablation import (
    REPORT_COLUMNS,
    TABLE,
    AblationFlags,
    ablation_flags_to_pipeline,
    run_ablation,
)
from ca2n.checkpoint import load_checkpoint
from ca2n.core.exceptions import TrainingInterrupted
from ca2n.metrics import evaluate as evaluate_pipeline
from ca2n.translator.training import Stage2Result


ALL_TERMS = ("content", "adversarial", "perceptual", "induced", "structural")


def test_table():
    assert len(TABLE) == 8
    assert len(set(TABLE)) == 8
    for cbam, da, gl, ie in TABLE:
        assert da == gl


@pytest.mark.parametrize(
    "flags,terms",
    [
        (AblationFlags(), ALL_TERMS),
        (AblationFlags(da=False, gl=False), ("content", "adversarial")),
        (AblationFlags(gl=False), ("content", "adversarial", "induced")),
        (
            AblationFlags(da=False),
            ("content", "adversarial", "perceptual", "structural"),
        ),
        (
            AblationFlags(loss_perceptual=False, loss_induced=False),
            ("content", "adversarial", "structural"),
        ),
    ],
)
def test_flags_to_pipeline(flags, terms):
    assert ablation_flags_to_pipeline(flags).terms == terms


def test_flags_to_hook_and_attention():
    switches = ablation_flags_to_pipeline(AblationFlags(cbam=False, ie=False))

    assert not switches.cbam
    assert switches.hook == "identity"
    assert switches.hook_identity

    switches = ablation_flags_to_pipeline(AblationFlags(), hook="sharpen")
    assert switches.hook == "sharpen"
    assert not switches.hook_identity


def test_flags_from_config(config):
    flags = AblationFlags.from_config(config.replace(da=False, ie=False))

    assert flags == AblationFlags(da=False, ie=False)
    assert flags.settings() == {
        "CBAM": True,
        "DA": False,
        "GL": True,
        "IE": False,
        "LOSS_INDUCED": True,
        "LOSS_PERCEPTUAL": True,
        "LOSS_STRUCTURAL": True,
    }


def test_run_ablation(runtime, tiny_dataset, tmp_path, caplog):
    test = tiny_dataset.subset(tiny_dataset.ids[:3])
    path = tmp_path / "reports" / "ablation.csv"
    rows = (TABLE[0], TABLE[7])

    with caplog.at_level(logging.INFO, logger="ca2n.ablation"):
        results = run_ablation(runtime, tiny_dataset, test, str(path), rows=rows)

    assert "cbam=False da=False gl=False ie=False hook=identity" in caplog.text
    assert "cbam=True da=True gl=True ie=True hook=unsharp" in caplog.text

    assert [(r["cbam"], r["ie"]) for r in results] == [("0", "0"), ("1", "1")]
    for result in results:
        assert result["fid"] == "unavailable"
        assert -1 <= result["ssim"] <= 1
        assert result["frechet_proxy"] >= 0

    with open(str(path), newline="") as fh:
        lines = list(csv.reader(fh))
    assert lines[0] == list(REPORT_COLUMNS)
    assert lines[1][:4] == ["0", "0", "0", "0"]
    assert lines[2][:7] == ["1", "1", "1", "1"] + ["unavailable"] * 3


@pytest.mark.slow
def test_run_full_table(runtime, tiny_dataset, tmp_path):
    path = tmp_path / "ablation.csv"

    results = run_ablation(runtime, tiny_dataset, tiny_dataset, str(path))

    assert len(results) == 8
    assert len(path.read_text().splitlines()) == 9


def test_ie_rows_run_the_ablation_hook(runtime, tiny_dataset, tmp_path, mocker):
    evaluate = mocker.patch("ca2n.metrics.evaluate", wraps=evaluate_pipeline)
    rows = (TABLE[4], TABLE[5])

    run_ablation(
        runtime, tiny_dataset, tiny_dataset, str(tmp_path / "a.csv"), rows=rows
    )

    hooks = [call.args[1].hook.config.mode for call in evaluate.call_args_list]
    assert hooks == ["identity", "unsharp"]


def test_interrupt_checkpoints_stage1(runtime, tiny_dataset, tmp_path):
    stop = threading.Event()
    stop.set()

    with pytest.raises(TrainingInterrupted) as excinfo:
        run_ablation(
            runtime,
            tiny_dataset,
            tiny_dataset,
            str(tmp_path / "a.csv"),
            rows=(TABLE[7],),
            stop=stop,
            checkpoint_dir=str(tmp_path / "ckpt"),
        )

    path = tmp_path / "ckpt" / "ablation_row1_stage1.ckpt"
    assert str(path) in str(excinfo.value)
    tensors = load_checkpoint(str(path))
    assert tensors
    assert all(name.startswith("autoencoders.") for name in tensors)


def test_interrupt_checkpoints_stage2(
    runtime, tiny_dataset, tmp_path, mocker, stage2_models
):
    mocker.patch(
        "ca2n.translator.training.train_stage2",
        side_effect=TrainingInterrupted(
            "stage 2 interrupted at step 0", result=Stage2Result(stage2_models)
        ),
    )

    with pytest.raises(TrainingInterrupted, match="stage 2 interrupted"):
        run_ablation(
            runtime,
            tiny_dataset,
            tiny_dataset,
            str(tmp_path / "a.csv"),
            rows=(TABLE[0],),
            checkpoint_dir=str(tmp_path / "ckpt"),
        )

    tensors = load_checkpoint(str(tmp_path / "ckpt" / "ablation_row1_stage2.ckpt"))
    assert {name.split(".")[0] for name in tensors} == {
        "encoders",
        "mappers",
        "generator",
        "discriminator",
    }
