
import math

import numpy as np
import pytest

from graspwire import images
from graspwire import losses
from graspwire import metrics
from graspwire.errors import Error
from graspwire.errors import ShapeError
from graspwire.metrics import MsSsimParams
from graspwire.metrics import SsimParams
from graspwire.tensor import Tensor


@pytest.fixture
def crops(toy_images):
    rng = np.random.default_rng(17)
    target = toy_images[:3, :, :64, :64]
    recon = np.clip(target + rng.normal(0, 0.1, size=target.shape), -1, 1).astype(np.float32)
    return recon, target


def test_ms_ssim_matches_metric(crops):
    recon, target = crops
    expected = np.mean([
        metrics.ms_ssim(images.denormalize(r), images.denormalize(t))
        for r, t in zip(recon, target)
    ])

    assert losses.ms_ssim(recon, target).item() == pytest.approx(expected, abs=1e-3)


def test_ms_ssim_identity(crops):
    _, target = crops
    assert losses.ms_ssim(target, target).item() == pytest.approx(1.0, abs=1e-4)


def test_ms_ssim_has_gradient(crops):
    recon, target = crops
    x = Tensor(recon, requires_grad=True)
    (1.0 - losses.ms_ssim(x, target)).backward()

    assert x.grad.shape == recon.shape
    assert np.all(np.isfinite(x.grad))
    assert np.abs(x.grad).sum() > 0


def test_ms_ssim_rejects_bad_inputs(crops):
    recon, target = crops

    with pytest.raises(ShapeError):
        losses.ms_ssim(recon, target[:2])

    with pytest.raises(Error):
        losses.ms_ssim(recon, target, MsSsimParams(ssim=SsimParams(alpha=2.0)))

    with pytest.raises(Error):
        losses.ms_ssim(recon[..., :30, :30], target[..., :30, :30])


def test_l1_loss():
    assert losses.l1_loss(np.array([1.0, -2.0]), np.zeros(2)).item() == pytest.approx(1.5)

    with pytest.raises(ShapeError):
        losses.l1_loss(np.zeros(2), np.zeros(3))


def test_bce_losses():
    assert losses.bce_loss(np.zeros(4), 1.0).item() == pytest.approx(math.log(2), rel=1e-6)
    assert losses.bce_loss(np.array([20.0]), 1.0).item() == pytest.approx(0.0, abs=1e-6)
    assert losses.discriminator_loss(np.zeros(3), np.zeros(3)).item() == pytest.approx(
        math.log(2), rel=1e-6)
    # log(1 + e^-2) for the real half, log(1 + e^2) for the fake half
    expected = 0.5 * (math.log1p(math.exp(-2.0)) + math.log1p(math.exp(2.0)))
    assert losses.discriminator_loss(np.array([2.0]), np.array([2.0])).item() == pytest.approx(
        expected, rel=1e-5)

    with pytest.raises(Error):
        losses.bce_loss(np.zeros(0), 1.0)

    with pytest.raises(ShapeError):
        losses.discriminator_loss(np.zeros(2), np.zeros(3))


def test_generator_loss_terms(crops):
    recon, target = crops
    logits = np.zeros(3)
    l1 = losses.l1_loss(recon, target).item()
    structural = 1.0 - losses.ms_ssim(recon, target).item()

    only_l1 = losses.generator_loss(recon, target, None, alpha_mix=0.0, lambda_adv=0.0)
    assert only_l1.item() == pytest.approx(l1, rel=1e-5)

    only_ms = losses.generator_loss(recon, target, None, alpha_mix=1.0, lambda_adv=0.0)
    assert only_ms.item() == pytest.approx(structural, rel=1e-4)

    mixed = losses.generator_loss(recon, target, logits, alpha_mix=0.84, lambda_adv=0.01)
    expected = 0.01 * math.log(2) + 0.84 * structural + 0.16 * l1
    assert mixed.item() == pytest.approx(expected, rel=1e-4)


def test_generator_loss_validation(crops):
    recon, target = crops

    with pytest.raises(Error):
        losses.generator_loss(recon, target, None, alpha_mix=1.5, lambda_adv=0.0)

    with pytest.raises(ShapeError):
        losses.generator_loss(recon, target[:1], None, alpha_mix=0.0, lambda_adv=0.0)
