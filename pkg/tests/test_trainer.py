
import json

import numpy as np
import pytest

from graspwire.codec import CodecConfig
from graspwire.codec import CodecModel
from graspwire.errors import DatasetError
from graspwire.errors import Error
from graspwire.errors import ShapeError
from graspwire.errors import TrainingError
from graspwire import losses
from graspwire.tensor import Adam
from graspwire.tensor import Tensor
from graspwire.trainer import Discriminator
from graspwire.trainer import TrainConfig
from graspwire.trainer import TrainReport
from graspwire.trainer import train

TINY = CodecConfig(latent_channels=1, residual_blocks=1, features=4)


def tiny_run(toy_images, **kwargs):
    options = dict(epochs=1, batch_size=2, log_every=1, validation_size=2, seed=4)
    options.update(kwargs)
    return train(toy_images[:4], TrainConfig(**options), TINY)


def test_discriminator_outputs_one_logit_per_image(toy_images):
    discriminator = Discriminator(seed=0)
    logits = discriminator(Tensor(toy_images[:3]))

    assert logits.shape == (3,)
    assert discriminator(Tensor(toy_images[0])).shape == (1,)


def test_discriminator_eval_is_deterministic(toy_images):
    discriminator = Discriminator(dropout=0.5, seed=0).eval()
    x = Tensor(toy_images[:2])
    np.testing.assert_array_equal(discriminator(x).data, discriminator(x).data)


@pytest.mark.parametrize('kwargs', [
    {'epochs': 0},
    {'batch_size': 0},
    {'learning_rate': 0.0},
    {'alpha_mix': 1.2},
    {'lambda_adv': -1.0},
    {'dropout': 1.0},
    {'max_steps': -1},
])
def test_config_validation(kwargs):
    with pytest.raises(Error):
        TrainConfig(**kwargs)


def test_tiny_run_logs_every_step(toy_images):
    model, discriminator, report = tiny_run(toy_images)

    assert [entry.step for entry in report] == [0, 1, 2]
    assert [entry.index for entry in report] == [0, 1, 2]
    assert report.entries[0].epoch == 0

    for entry in report:
        assert np.isfinite(entry.generator_loss)
        assert np.isfinite(entry.discriminator_loss)
        assert -1.0 <= entry.val_ssim <= 1.0

    assert not discriminator.training
    assert model.config == TINY


def test_training_is_deterministic(toy_images):
    first = tiny_run(toy_images)
    second = tiny_run(toy_images)

    assert first[2] == second[2]
    assert first[0].model_id == second[0].model_id


def test_max_steps(toy_images):
    _, _, report = tiny_run(toy_images, max_steps=1, epochs=5)
    assert [entry.step for entry in report] == [0, 1]


def test_training_changes_the_model(toy_images):
    model, _, _ = tiny_run(toy_images, max_steps=1)
    assert model.model_id != CodecModel(TINY, seed=4).model_id


def test_report_jsonl(tmp_path, toy_images):
    _, _, report = tiny_run(toy_images, max_steps=1)
    path = str(tmp_path / 'log.jsonl')
    report.write_jsonl(path)

    with open(path) as fin:
        lines = [json.loads(line) for line in fin]

    assert len(lines) == 2
    assert set(lines[0]) == {
        'index', 'step', 'epoch', 'generator_loss', 'discriminator_loss', 'val_ssim', 'val_psnr'}
    assert TrainReport(report.entries) == report


def test_dataset_errors(toy_images):
    with pytest.raises(DatasetError):
        train(np.zeros((0, 3, 210, 150)), TrainConfig(epochs=1), TINY)

    with pytest.raises(DatasetError):
        train(np.zeros((3, 210, 150)), TrainConfig(epochs=1), TINY)

    with pytest.raises(ShapeError):
        train(np.zeros((2, 3, 100, 100)), TrainConfig(epochs=1), TINY)


def assert_unchanged(arrays, kept):
    assert len(arrays) == len(kept)

    for array, old in zip(arrays, kept):
        np.testing.assert_array_equal(array, old)


def test_non_finite_discriminator_loss_aborts_before_any_step(toy_images):
    data = toy_images[:4].copy()
    data[2:] = np.nan
    model = CodecModel(TINY, seed=4)
    discriminator = Discriminator(seed=5)
    before = [array.copy() for array in model.parameter_arrays()]
    arrays = [array.copy() for array in discriminator.state_arrays()]
    config = TrainConfig(epochs=1, batch_size=4, log_every=1, validation_size=2, seed=4)

    with pytest.raises(TrainingError, match='discriminator'):
        train(data, config, model=model, discriminator=discriminator)

    assert_unchanged(model.parameter_arrays(), before)
    assert_unchanged(discriminator.state_arrays(), arrays)


def test_non_finite_generator_loss_aborts_before_the_generator_step(monkeypatch, toy_images):
    real = losses.generator_loss
    monkeypatch.setattr(
        losses, 'generator_loss', lambda *args, **kwargs: real(*args, **kwargs) * float('nan'))
    model = CodecModel(TINY, seed=4)
    before = [array.copy() for array in model.parameter_arrays()]

    with pytest.raises(TrainingError, match='generator'):
        train(toy_images[:4], TrainConfig(epochs=1, batch_size=2, validation_size=2, seed=4),
              model=model)

    assert_unchanged(model.parameter_arrays(), before)


def structural_loss(model, x):
    return losses.generator_loss(model.decoder(model.encoder(x)), x, None, 0.84, 0.0)


@pytest.mark.parametrize('seed', [0, 1, 2])
def test_one_generator_step_lowers_structural_loss(seed, toy_images):
    model = CodecModel(TINY, seed=seed)
    x = Tensor(toy_images[2 * seed:2 * seed + 2])
    optimizer = Adam(model.parameters(), lr=2e-4)

    loss = structural_loss(model, x)
    before = loss.item()
    loss.backward()
    optimizer.step()

    assert structural_loss(model, x).item() < before


def test_every_codec_parameter_receives_gradient(toy_images):
    model = CodecModel(TINY, seed=0)
    optimizer = Adam(model.parameters(), lr=2e-4)
    reached = [False] * len(model.parameters())

    for index in range(10):
        start = 2 * index % toy_images.shape[0]
        optimizer.zero_grad()
        structural_loss(model, Tensor(toy_images[start:start + 2])).backward()
        reached = [
            seen or (tensor.grad is not None and bool(np.any(tensor.grad != 0)))
            for seen, tensor in zip(reached, model.parameters())
        ]
        optimizer.step()

    names = [name for name, _ in model.encoder.named_parameters('encoder.')]
    names += [name for name, _ in model.decoder.named_parameters('decoder.')]
    assert all(reached), [name for name, seen in zip(names, reached) if not seen]


@pytest.mark.slow
def test_training_improves_reconstruction(trained_codec):
    model, _, report = trained_codec

    assert round(model.compression_ratio, 2) == 16.29
    assert report.entries[-1].step == 200
    assert report.entries[-1].val_ssim - report.entries[0].val_ssim >= 0.15
