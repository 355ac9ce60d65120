import numpy as np
import pytest

from eglass.generator import SignalTensor
from eglass.perceptual import (
    FeatureExtractorSpec,
    feature_jacobian,
    features,
    get_extractor,
    perceptual_distance,
)


def signal(seed, shape=(8, 8)):
    rng = np.random.default_rng(seed)
    return SignalTensor(rng.standard_normal(shape[0] * shape[1]), shape)


def test_distance_axioms(small_features):
    x1, x2 = signal(1), signal(2)
    assert perceptual_distance(small_features, x1, x1) == 0.0
    d12 = perceptual_distance(small_features, x1, x2)
    assert d12 > 0
    assert d12 == perceptual_distance(small_features, x2, x1)


def test_features_deterministic(small_features):
    x = signal(3)
    f1 = features(small_features, x)
    f2 = get_extractor(small_features, x.shape).features(x)
    np.testing.assert_array_equal(f1, f2)


def test_feature_jacobian_matches_finite_differences(small_features):
    x = signal(4)
    jac = feature_jacobian(small_features, x)
    step = 1e-6
    for i in (0, 17, 63):
        e = np.zeros(64)
        e[i] = step
        fd = (
            features(small_features, SignalTensor(x.values + e, x.shape))
            - features(small_features, SignalTensor(x.values - e, x.shape))
        ) / (2 * step)
        assert np.max(np.abs(jac[:, i] - fd)) < 1e-6


def test_calibration_normalizes_channels(small_features):
    fe = get_extractor(small_features, (8, 8))
    rng = np.random.default_rng(small_features.filter_seed + 1)
    calib = rng.standard_normal((small_features.n_calibration, 64))
    resp = calib @ fe.linear.T
    scaled = fe.channel_scale * np.tanh(resp)
    for a, b in fe.channel_slices:
        assert abs(scaled[:, a:b].std() - 1.0) < 1e-8


def test_shape_checks(small_features):
    with pytest.raises(ValueError):
        perceptual_distance(small_features, signal(1, (8, 8)), signal(1, (16, 16)))
    fe = get_extractor(small_features, (8, 8))
    with pytest.raises(ValueError):
        fe.features(np.ones(7))


def test_pyramid_divisibility():
    spec = FeatureExtractorSpec(n_scales=4)
    with pytest.raises(ValueError):
        get_extractor(spec, (12, 12))


def test_spec_roundtrip_and_validation():
    spec = FeatureExtractorSpec(n_scales=2, filters_per_scale=3, filter_size=3,
                                filter_seed=5, n_calibration=8)
    assert FeatureExtractorSpec.from_json(spec.to_json()) == spec
    with pytest.raises(ValueError):
        FeatureExtractorSpec(filter_size=4)
    with pytest.raises(ValueError):
        FeatureExtractorSpec(n_scales=0)
    with pytest.raises(ValueError):
        FeatureExtractorSpec.from_json({"n_scales": 2, "mystery": 1})
