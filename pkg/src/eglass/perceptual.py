"""Seeded random-feature perceptual distance.

Features are a dyadic average-pool pyramid convolved with fixed zero-mean
random filters, passed through tanh and scaled per channel so that seeded
calibration signals have unit feature variance. The whole pre-tanh map is
linear, which gives exact Jacobians and a Gauss-Newton metric that is exact
at the base point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .generator import SignalTensor
from .linalg import check_finite


@dataclass(frozen=True)
class FeatureExtractorSpec:
    n_scales: int = 3
    filters_per_scale: int = 8
    filter_size: int = 5
    filter_seed: int = 0
    n_calibration: int = 16

    def __post_init__(self):
        if self.n_scales < 1 or self.filters_per_scale < 1:
            raise ValueError("scales and filters must be >= 1")
        if self.filter_size % 2 == 0 or self.filter_size < 1:
            raise ValueError("filter_size must be odd and positive")
        if self.n_calibration < 2:
            raise ValueError("need at least 2 calibration signals")

    def to_json(self) -> dict:
        return {
            "n_scales": self.n_scales,
            "filters_per_scale": self.filters_per_scale,
            "filter_size": self.filter_size,
            "filter_seed": self.filter_seed,
            "n_calibration": self.n_calibration,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FeatureExtractorSpec":
        allowed = {
            "n_scales", "filters_per_scale", "filter_size",
            "filter_seed", "n_calibration",
        }
        unknown = set(obj) - allowed
        if unknown:
            raise ValueError(f"unknown feature spec fields: {sorted(unknown)}")
        return cls(**obj)


def _filters(spec: FeatureExtractorSpec) -> np.ndarray:
    """(n_scales, filters_per_scale, k, k) zero-mean seeded filters."""
    rng = np.random.default_rng(spec.filter_seed)
    k = spec.filter_size
    f = rng.standard_normal((spec.n_scales, spec.filters_per_scale, k, k))
    f -= f.mean(axis=(2, 3), keepdims=True)
    f /= k  # keep responses O(1) regardless of filter size
    return f


def _pool(batch: np.ndarray, factor: int) -> np.ndarray:
    b, h, w = batch.shape
    return batch.reshape(b, h // factor, factor, w // factor, factor).mean(axis=(2, 4))


def _correlate_batch(batch: np.ndarray, kern: np.ndarray) -> np.ndarray:
    """Zero-padded 'same' correlation of a (b,h,w) batch with one 2-D kernel."""
    k = kern.shape[0]
    r = k // 2
    b, h, w = batch.shape
    padded = np.pad(batch, ((0, 0), (r, r), (r, r)))
    out = np.zeros_like(batch)
    for i in range(k):
        for j in range(k):
            if kern[i, j] != 0.0:
                out += kern[i, j] * padded[:, i : i + h, j : j + w]
    return out


class FeatureExtractor:
    """Materialized linear pre-tanh map and normalization for one signal shape."""

    def __init__(self, spec: FeatureExtractorSpec, shape: Tuple[int, int]):
        h, w = shape
        max_factor = 2 ** (spec.n_scales - 1)
        if h % max_factor or w % max_factor:
            raise ValueError(
                f"shape {h}x{w} not divisible by pyramid factor {max_factor}"
            )
        self.spec = spec
        self.shape = (h, w)
        self.n = h * w
        filters = _filters(spec)

        basis = np.eye(self.n).reshape(self.n, h, w)
        blocks = []
        self.channel_slices = []
        pos = 0
        for s in range(spec.n_scales):
            pooled = _pool(basis, 2**s)
            for f in range(spec.filters_per_scale):
                resp = _correlate_batch(pooled, filters[s, f])
                block = resp.reshape(self.n, -1).T  # (spatial, n)
                blocks.append(block)
                self.channel_slices.append((pos, pos + block.shape[0]))
                pos += block.shape[0]
        self.linear = np.vstack(blocks)  # (feature_len, n)
        self.feature_len = self.linear.shape[0]

        # per-channel scale so tanh responses to calibration noise have unit std
        rng = np.random.default_rng(spec.filter_seed + 1)
        calib = rng.standard_normal((spec.n_calibration, self.n))
        resp = np.tanh(calib @ self.linear.T)  # (n_calib, feature_len)
        self.channel_scale = np.empty(self.feature_len)
        for a, b in self.channel_slices:
            std = float(resp[:, a:b].std())
            self.channel_scale[a:b] = 1.0 / max(std, 1e-12)

    def _values(self, x) -> np.ndarray:
        v = x.values if isinstance(x, SignalTensor) else check_finite(x, "signal")
        if v.shape != (self.n,):
            raise ValueError(f"signal length {v.shape} != ({self.n},)")
        return v

    def features(self, x) -> np.ndarray:
        return self.channel_scale * np.tanh(self.linear @ self._values(x))

    def feature_jacobian(self, x) -> np.ndarray:
        pre = self.linear @ self._values(x)
        return (self.channel_scale * (1.0 - np.tanh(pre) ** 2))[:, None] * self.linear


_CACHE: Dict[tuple, FeatureExtractor] = {}


def get_extractor(spec: FeatureExtractorSpec, shape: Tuple[int, int]) -> FeatureExtractor:
    key = (spec, tuple(shape))
    if key not in _CACHE:
        _CACHE[key] = FeatureExtractor(spec, tuple(shape))
    return _CACHE[key]


def features(spec: FeatureExtractorSpec, x: SignalTensor) -> np.ndarray:
    return get_extractor(spec, x.shape).features(x)


def feature_jacobian(spec: FeatureExtractorSpec, x: SignalTensor) -> np.ndarray:
    return get_extractor(spec, x.shape).feature_jacobian(x)


def perceptual_distance(spec: FeatureExtractorSpec, x1: SignalTensor, x2: SignalTensor) -> float:
    """Squared l2 distance between feature embeddings."""
    if x1.shape != x2.shape:
        raise ValueError("signals must share a shape")
    fe = get_extractor(spec, x1.shape)
    diff = fe.features(x1) - fe.features(x2)
    return float(diff @ diff)
