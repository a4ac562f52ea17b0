import math
import threading

import numpy as np
import pytest

from ca2n.app import create_runtime
from ca2n.configs.desk import DeskConfig
from ca2n.core.exceptions import (
    ConfigurationError,
    TrainingInterrupted,
    ValidationError,
)
from ca2n.dataio import DatasetManifest, split_train_test, synth_faces
from ca2n.facelayout import default_layout
from ca2n.losses import TERMS
from ca2n.metrics import evaluate
from ca2n.numerics import Optimizer
from ca2n.stage1 import AutoencoderSet, train_stage1
from ca2n.translator.inference import Pipeline
from ca2n.translator.training import Stage2Models, train_stage2


@pytest.fixture
def autoencoders(config, layout):
    return AutoencoderSet.build(layout, config)


def test_train_stage2(tiny_dataset, autoencoders, config, layout, tmp_path):
    log_path = tmp_path / "stage2.csv"
    before = autoencoders["nose"].encoder.fc.weight.numpy()

    result = train_stage2(
        tiny_dataset, autoencoders, config, layout, log_path=str(log_path)
    )

    assert len(result.history) == config.stage2_steps
    for record in result.history:
        assert set(record.breakdown) == set(TERMS)
        assert np.isfinite(record.objective)
        assert np.isfinite(record.d_loss)
        assert record.induced_grad_norm is not None
        assert record.objective == pytest.approx(
            sum(term.weighted for term in record.breakdown.values()), rel=1e-5
        )
    # the stage 1 encoders are fine-tuned in place
    assert result.models.encoders["nose"] is autoencoders["nose"].encoder
    assert not np.array_equal(before, autoencoders["nose"].encoder.fc.weight.data)

    header, *rows = log_path.read_text().splitlines()
    assert header.split(",")[:5] == [
        "step",
        "d_loss",
        "objective",
        "content_raw",
        "content_weighted",
    ]
    assert header.endswith("induced_grad_norm")
    assert len(rows) == config.stage2_steps


def test_ablated_terms(tiny_dataset, autoencoders, config, layout, tmp_path):
    config = config.replace(da=False, gl=False)
    log_path = tmp_path / "stage2.csv"

    result = train_stage2(
        tiny_dataset, autoencoders, config, layout, log_path=str(log_path)
    )

    for record in result.history:
        assert set(record.breakdown) == {"content", "adversarial"}
        assert record.induced_grad_norm is None
    header = log_path.read_text().splitlines()[0]
    assert "perceptual_raw" not in header
    assert "induced_raw" not in header


def test_fine_grained_term_switches(tiny_dataset, autoencoders, config, layout):
    config = config.replace(loss_structural=False, stage2_steps=1)

    result = train_stage2(tiny_dataset, autoencoders, config, layout)

    assert set(result.history[0].breakdown) == {
        "content",
        "adversarial",
        "perceptual",
        "induced",
    }


def test_conditional_discriminator(tiny_dataset, autoencoders, config, layout):
    config = config.replace(discriminator_sketch=True, stage2_steps=1)

    result = train_stage2(tiny_dataset, autoencoders, config, layout)

    assert result.models.discriminator.with_sketch
    assert np.isfinite(result.history[0].d_loss)


def test_training_is_reproducible(tiny_dataset, config, layout):
    config = config.replace(stage2_steps=1)

    first = train_stage2(
        tiny_dataset, AutoencoderSet.build(layout, config), config, layout
    )
    second = train_stage2(
        tiny_dataset, AutoencoderSet.build(layout, config), config, layout
    )

    assert first.history[0].objective == second.history[0].objective
    a = first.models.generator.state()
    b = second.models.generator.state()
    for name in a:
        np.testing.assert_array_equal(a[name], b[name])


def test_missing_autoencoders(tiny_dataset, config):
    with pytest.raises(ConfigurationError):
        train_stage2(tiny_dataset, None, config)


def test_empty_dataset(autoencoders, config):
    with pytest.raises(ValidationError):
        train_stage2(DatasetManifest([], 32), autoencoders, config)


def test_stop_event_interrupts(tiny_dataset, autoencoders, config, layout):
    stop = threading.Event()
    stop.set()

    with pytest.raises(TrainingInterrupted) as excinfo:
        train_stage2(tiny_dataset, autoencoders, config, layout, stop=stop)
    assert excinfo.value.result.history == []
    assert excinfo.value.result.models.generator is not None


def test_initial_discriminator_loss(tiny_dataset, autoencoders, config, layout):
    config = config.replace(stage2_steps=1)

    result = train_stage2(tiny_dataset, autoencoders, config, layout)

    assert abs(result.history[0].d_loss - 2 * math.log(2)) <= 0.2


def test_updates_touch_disjoint_parameters(
    tiny_dataset, autoencoders, config, layout, mocker
):
    built = []
    build = Stage2Models.build

    def capture(*args, **kwargs):
        built.append(build(*args, **kwargs))
        return built[-1]

    step = Optimizer.step
    roles = []

    def checked_step(optimizer, gradients):
        generator = built[-1].generator_parameters()
        discriminator = built[-1].discriminator_parameters()
        if set(optimizer.params) == set(discriminator):
            roles.append("d")
            untouched = generator
        else:
            assert set(optimizer.params) == set(generator)
            roles.append("g")
            untouched = discriminator
        before = {name: param.data.copy() for name, param in untouched.items()}
        step(optimizer, gradients)
        for name, param in untouched.items():
            assert np.array_equal(param.data, before[name]), name

    mocker.patch.object(Stage2Models, "build", side_effect=capture)
    mocker.patch.object(Optimizer, "step", autospec=True, side_effect=checked_step)

    train_stage2(tiny_dataset, autoencoders, config.replace(stage2_steps=2), layout)

    assert roles == ["d", "g", "d", "g"]
    assert not set(built[-1].generator_parameters()) & set(
        built[-1].discriminator_parameters()
    )


@pytest.fixture(scope="module")
def twenty_pairs():
    return synth_faces(20, seed=11, size=32)


def _mean_l1(models, layout, dataset):
    generated = Pipeline.from_models(models, layout).generate(dataset.sketches())
    return float(np.mean(np.abs(generated - dataset.photos())))


@pytest.mark.slow
def test_reconstruction_only_training(twenty_pairs, config, layout):
    config = config.replace(
        w_adv=0.0,
        w_perc=0.0,
        w_induced=0.0,
        w_str=0.0,
        stage2_steps=1500,
        batch_size=4,
    )
    autoencoders = AutoencoderSet.build(layout, config)

    result = train_stage2(twenty_pairs, autoencoders, config, layout)

    assert _mean_l1(result.models, layout, twenty_pairs) < 0.08


@pytest.mark.slow
def test_stage2_smoke_ssim():
    config = create_runtime(DeskConfig, environ={}).config.replace(seed=5)
    layout = default_layout(config.resolution, config.layout)
    manifest = synth_faces(220, seed=config.seed, size=config.resolution)
    train, test = split_train_test(manifest, config.split_ratio, config.seed)
    stage1 = train_stage1(train.sketches(), config, layout)
    untrained = Stage2Models.build(
        AutoencoderSet.build(layout, config).encoders(), layout, config
    )
    baseline = evaluate(test, Pipeline.from_models(untrained, layout))

    result = train_stage2(train, stage1.autoencoders, config, layout)
    report = evaluate(test, Pipeline.from_models(result.models, layout))

    for record in result.history:
        assert np.isfinite(record.objective)
        assert all(np.isfinite(t.raw) for t in record.breakdown.values())
    assert len(test) == 20
    assert report.ssim > 0.5
    assert report.ssim - baseline.ssim >= 0.2
