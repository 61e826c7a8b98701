
import threading

import numpy as np
import pytest

from graspwire.codec import CodecConfig
from graspwire.codec import CodecModel
from graspwire.grasp.detector import DetectorModel
from graspwire.trainer import TrainConfig
from graspwire.trainer import train
from graspwire import images


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope='session')
def codec():
    """Untrained codec at the 4.07% setting."""
    return CodecModel(CodecConfig(latent_channels=2), seed=7)


@pytest.fixture(scope='session')
def foreign_codec():
    return CodecModel(CodecConfig(latent_channels=2), seed=8)


@pytest.fixture(scope='session')
def detector():
    return DetectorModel(seed=3)


@pytest.fixture(scope='session')
def toy_images():
    return images.synthetic_images(12, seed=5)


@pytest.fixture(scope='session')
def toy_training_set():
    return images.synthetic_images(64, seed=11)


@pytest.fixture(scope='session')
def held_out_images():
    return list(images.synthetic_images(10, seed=99))


@pytest.fixture(scope='session')
def trained_codec(toy_training_set):
    """
    Codec at the 16.29% setting after 200 steps at lr 2e-4 on the
    64-image toy set. Returns ``(model, discriminator, report)``.
    """
    config = TrainConfig(
        epochs=25, learning_rate=2e-4, batch_size=8, log_every=50, max_steps=200,
        validation_size=8, seed=1)
    return train(toy_training_set, config, CodecConfig(latent_channels=8))


@pytest.fixture
def loopback(codec, detector):
    from graspwire.netproto.server import GraspServer
    from graspwire.netproto.server import ServerConfig

    server = GraspServer(('127.0.0.1', 0), codec, detector, ServerConfig(max_frame_size=64 * 1024, timeout=5.0))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()

    yield server

    server.shutdown()
    server.server_close()
    thread.join(5.0)
