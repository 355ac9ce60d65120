import numpy as np
import pytest

from eglass import bench
from eglass.config import preset
from eglass.generator import GeneratorSpec
from eglass.operators import OperatorSpec
from eglass.perceptual import FeatureExtractorSpec


@pytest.fixture(scope="session")
def sr_ctx():
    return bench.prepare(preset("sr"))


@pytest.fixture(scope="session")
def ip_ctx():
    return bench.prepare(preset("ip"))


@pytest.fixture(scope="session")
def cs_ctx():
    return bench.prepare(preset("cs"))


@pytest.fixture
def small_generator():
    spec = GeneratorSpec(
        kind="mlp",
        latent_dim=6,
        signal_shape=(8, 8),
        hidden_widths=(16, 32),
        activation="tanh",
        weight_seed=3,
    )
    from eglass.generator import instantiate

    return instantiate(spec)


@pytest.fixture
def small_features():
    return FeatureExtractorSpec(n_scales=2, filters_per_scale=4, filter_size=3)


def operator_zoo(shape=(8, 8)):
    rng = np.random.default_rng(42)
    mask = rng.random(shape) < 0.5
    mask.flat[0] = True  # never empty
    return [
        OperatorSpec(kind="downsample", signal_shape=shape, factor=2),
        OperatorSpec(kind="mask", signal_shape=shape, mask=mask),
        OperatorSpec(kind="blur", signal_shape=shape, kernel=np.array([0.25, 0.5, 0.25])),
        OperatorSpec(kind="random_projection", signal_shape=shape, m=10, proj_seed=5),
    ]
