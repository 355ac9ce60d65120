"""Toy differentiable generators mapping latent vectors to 2-D signals.

Two families: a pure linear map and a small MLP with smooth activations.
Weights are a deterministic function of the spec's seed, so instances are
never serialized, only their specs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .linalg import check_finite

_ACTIVATIONS = {
    "tanh": (np.tanh, lambda a: 1.0 - np.tanh(a) ** 2),
    "softplus": (
        lambda a: np.logaddexp(0.0, a),
        lambda a: 1.0 / (1.0 + np.exp(-a)),
    ),
}


@dataclass(frozen=True)
class SignalTensor:
    """Flattened 2-D signal with its grid shape."""

    values: np.ndarray
    shape: Tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "values", check_finite(self.values, "signal"))
        h, w = self.shape
        if len(self.values) != h * w:
            raise ValueError(
                f"signal length {len(self.values)} != {h}x{w}"
            )

    def grid(self) -> np.ndarray:
        return self.values.reshape(self.shape)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str  # "linear" | "mlp"
    latent_dim: int
    signal_shape: Tuple[int, int]
    hidden_widths: Tuple[int, ...] = ()
    activation: str = "tanh"
    weight_seed: int = 0
    weight_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "mlp"):
            raise ValueError(f"unknown generator kind {self.kind!r}")
        h, w = self.signal_shape
        if h <= 0 or w <= 0 or self.latent_dim <= 0:
            raise ValueError("dimensions must be positive")
        if self.latent_dim > h * w:
            raise ValueError("latent_dim must not exceed signal size")
        if self.kind == "mlp":
            if any(wd <= 0 for wd in self.hidden_widths):
                raise ValueError("hidden widths must be positive")
            if self.activation not in _ACTIVATIONS:
                raise ValueError(f"unknown activation {self.activation!r}")
        if self.weight_scale <= 0:
            raise ValueError("weight_scale must be positive")
        object.__setattr__(self, "signal_shape", tuple(self.signal_shape))
        object.__setattr__(self, "hidden_widths", tuple(self.hidden_widths))

    @property
    def signal_dim(self) -> int:
        return self.signal_shape[0] * self.signal_shape[1]

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "latent_dim": self.latent_dim,
            "signal_shape": list(self.signal_shape),
            "hidden_widths": list(self.hidden_widths),
            "activation": self.activation,
            "weight_seed": self.weight_seed,
            "weight_scale": self.weight_scale,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GeneratorSpec":
        allowed = {
            "kind", "latent_dim", "signal_shape", "hidden_widths",
            "activation", "weight_seed", "weight_scale",
        }
        unknown = set(obj) - allowed
        if unknown:
            raise ValueError(f"unknown generator spec fields: {sorted(unknown)}")
        obj = dict(obj)
        obj["signal_shape"] = tuple(obj["signal_shape"])
        obj["hidden_widths"] = tuple(obj.get("hidden_widths", ()))
        return cls(**obj)


@dataclass(frozen=True)
class GeneratorInstance:
    spec: GeneratorSpec
    weights: Tuple[np.ndarray, ...] = field(repr=False)


def instantiate(spec: GeneratorSpec) -> GeneratorInstance:
    """Draw layer weights from the seeded stream, scaled by scale/sqrt(fan_in)."""
    rng = np.random.default_rng(spec.weight_seed)
    if spec.kind == "linear":
        widths = [spec.latent_dim, spec.signal_dim]
    else:
        widths = [spec.latent_dim, *spec.hidden_widths, spec.signal_dim]
    weights = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        w = rng.standard_normal((fan_out, fan_in)) * (
            spec.weight_scale / np.sqrt(fan_in)
        )
        weights.append(w)
    return GeneratorInstance(spec, tuple(weights))


def _check_latent(g: GeneratorInstance, z: np.ndarray) -> np.ndarray:
    z = check_finite(z, "latent")
    if z.shape != (g.spec.latent_dim,):
        raise ValueError(
            f"latent length {z.shape} != ({g.spec.latent_dim},)"
        )
    return z


def generate(g: GeneratorInstance, z: np.ndarray) -> SignalTensor:
    """Forward pass: activation between hidden layers, linear output layer."""
    z = _check_latent(g, z)
    if g.spec.kind == "linear":
        return SignalTensor(g.weights[0] @ z, g.spec.signal_shape)
    act, _ = _ACTIVATIONS[g.spec.activation]
    h = z
    for w in g.weights[:-1]:
        h = act(w @ h)
    return SignalTensor(g.weights[-1] @ h, g.spec.signal_shape)


def jacobian(g: GeneratorInstance, z: np.ndarray) -> np.ndarray:
    """Exact (n x n_z) Jacobian of the forward pass via the chain rule."""
    z = _check_latent(g, z)
    if g.spec.kind == "linear":
        return g.weights[0].copy()
    act, dact = _ACTIVATIONS[g.spec.activation]
    h = z
    jac = np.eye(g.spec.latent_dim)
    for w in g.weights[:-1]:
        pre = w @ h
        jac = dact(pre)[:, None] * (w @ jac)
        h = act(pre)
    return g.weights[-1] @ jac


def spec_to_string(spec: GeneratorSpec) -> str:
    return json.dumps(spec.to_json(), sort_keys=True)
