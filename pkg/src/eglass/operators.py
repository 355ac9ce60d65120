"""Linear measurement operators: matrix-free apply/adjoint plus dense
materialization for oracle tests.

Supported kinds: box-average downsampling, boolean masking (inpainting),
separable blur with zero padding, and a seeded Gaussian random projection.
Reported residuals are mean squared error over the m measurement entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from .generator import SignalTensor
from .linalg import check_finite

_MATERIALIZE_CAP = 10**7


@dataclass(frozen=True)
class MeasurementVector:
    values: np.ndarray
    noise_sigma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", check_finite(self.values, "measurement"))


@dataclass(frozen=True)
class OperatorSpec:
    kind: str  # downsample | mask | blur | random_projection
    signal_shape: Tuple[int, int]
    factor: Optional[int] = None
    mask: Optional[np.ndarray] = field(default=None)
    kernel: Optional[np.ndarray] = field(default=None)
    m: Optional[int] = None
    proj_seed: int = 0

    def __post_init__(self):
        h, w = self.signal_shape
        object.__setattr__(self, "signal_shape", (int(h), int(w)))
        if self.kind == "downsample":
            f = self.factor
            if not f or h % f or w % f:
                raise ValueError(
                    f"downsample factor {f} must divide shape {h}x{w}"
                )
        elif self.kind == "mask":
            if self.mask is None:
                raise ValueError("mask operator requires a boolean grid")
            mk = np.asarray(self.mask, dtype=bool)
            if mk.shape != (h, w):
                raise ValueError(f"mask shape {mk.shape} != {(h, w)}")
            object.__setattr__(self, "mask", mk)
        elif self.kind == "blur":
            k = np.asarray(self.kernel, dtype=float)
            if k.ndim != 1 or len(k) % 2 == 0:
                raise ValueError("blur kernel must be a 1-D odd-length tap list")
            object.__setattr__(self, "kernel", k)
        elif self.kind == "random_projection":
            if not self.m or self.m > h * w:
                raise ValueError(f"projection output dim {self.m} invalid (n={h*w})")
        else:
            raise ValueError(f"unknown operator kind {self.kind!r}")

    @property
    def n(self) -> int:
        return self.signal_shape[0] * self.signal_shape[1]

    @property
    def output_dim(self) -> int:
        h, w = self.signal_shape
        if self.kind == "downsample":
            return (h // self.factor) * (w // self.factor)
        if self.kind == "mask":
            return int(np.count_nonzero(self.mask))
        if self.kind == "blur":
            return h * w
        return int(self.m)

    def to_json(self) -> dict:
        obj = {"kind": self.kind, "signal_shape": list(self.signal_shape)}
        if self.kind == "downsample":
            obj["factor"] = self.factor
        elif self.kind == "mask":
            obj["mask"] = self.mask.astype(int).ravel().tolist()
        elif self.kind == "blur":
            obj["kernel"] = self.kernel.tolist()
        else:
            obj["m"] = self.m
            obj["proj_seed"] = self.proj_seed
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "OperatorSpec":
        allowed = {"kind", "signal_shape", "factor", "mask", "kernel", "m", "proj_seed"}
        unknown = set(obj) - allowed
        if unknown:
            raise ValueError(f"unknown operator spec fields: {sorted(unknown)}")
        obj = dict(obj)
        shape = tuple(obj["signal_shape"])
        obj["signal_shape"] = shape
        if obj.get("mask") is not None:
            obj["mask"] = np.asarray(obj["mask"]).reshape(shape).astype(bool)
        if obj.get("kernel") is not None:
            obj["kernel"] = np.asarray(obj["kernel"], dtype=float)
        return cls(**obj)


@lru_cache(maxsize=32)
def _projection_matrix(m: int, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((m, n)) / np.sqrt(n)


def _as_grid(op: OperatorSpec, x) -> np.ndarray:
    v = x.values if isinstance(x, SignalTensor) else np.asarray(x, dtype=float)
    if v.shape != (op.n,):
        raise ValueError(f"signal length {v.shape} != ({op.n},)")
    return v.reshape(op.signal_shape)


def _correlate_separable(grid: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Zero-padded separable correlation along both axes."""
    r = len(taps) // 2
    out = np.zeros_like(grid)
    padded = np.pad(grid, ((r, r), (0, 0)))
    for i, t in enumerate(taps):
        out += t * padded[i : i + grid.shape[0], :]
    grid2 = out
    out = np.zeros_like(grid2)
    padded = np.pad(grid2, ((0, 0), (r, r)))
    for i, t in enumerate(taps):
        out += t * padded[:, i : i + grid.shape[1]]
    return out


def apply(op: OperatorSpec, x) -> MeasurementVector:
    """Noiseless forward map y = A x."""
    grid = _as_grid(op, x)
    h, w = op.signal_shape
    if op.kind == "downsample":
        f = op.factor
        y = grid.reshape(h // f, f, w // f, f).mean(axis=(1, 3)).ravel()
    elif op.kind == "mask":
        y = grid[op.mask]
    elif op.kind == "blur":
        y = _correlate_separable(grid, op.kernel).ravel()
    else:
        y = _projection_matrix(op.m, op.n, op.proj_seed) @ grid.ravel()
    return MeasurementVector(y)


def adjoint(op: OperatorSpec, y) -> SignalTensor:
    """Exact adjoint A^T y, verified by probe tests against apply."""
    v = y.values if isinstance(y, MeasurementVector) else np.asarray(y, dtype=float)
    if v.shape != (op.output_dim,):
        raise ValueError(f"measurement length {v.shape} != ({op.output_dim},)")
    h, w = op.signal_shape
    if op.kind == "downsample":
        f = op.factor
        grid = np.kron(v.reshape(h // f, w // f), np.ones((f, f))) / f**2
    elif op.kind == "mask":
        grid = np.zeros((h, w))
        grid[op.mask] = v
    elif op.kind == "blur":
        grid = _correlate_separable(v.reshape(h, w), op.kernel[::-1])
    else:
        grid = (_projection_matrix(op.m, op.n, op.proj_seed).T @ v).reshape(h, w)
    return SignalTensor(grid.ravel(), op.signal_shape)


def measure(op: OperatorSpec, x, sigma: float, noise_seed: int = 0) -> MeasurementVector:
    """y = A x + n with i.i.d. Gaussian noise of std sigma from a seeded stream."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    clean = apply(op, x).values
    if sigma == 0:
        return MeasurementVector(clean, 0.0)
    rng = np.random.default_rng(noise_seed)
    return MeasurementVector(clean + sigma * rng.standard_normal(len(clean)), sigma)


def materialize(op: OperatorSpec) -> np.ndarray:
    """Dense m x n matrix with column j = apply(e_j)."""
    m, n = op.output_dim, op.n
    if m * n > _MATERIALIZE_CAP:
        raise ValueError(f"materialization size {m}x{n} exceeds cap")
    if op.kind == "random_projection":
        return _projection_matrix(op.m, op.n, op.proj_seed).copy()
    if op.kind == "mask":
        a = np.zeros((m, n))
        a[np.arange(m), np.flatnonzero(op.mask.ravel())] = 1.0
        return a
    a = np.empty((m, n))
    e = np.zeros(n)
    for j in range(n):
        e[j] = 1.0
        a[:, j] = apply(op, e).values
        e[j] = 0.0
    return a


def apply_matrix(op: OperatorSpec, cols: np.ndarray) -> np.ndarray:
    """Apply the operator to each column of an n x k matrix, matrix-free."""
    return np.column_stack([apply(op, cols[:, j]).values for j in range(cols.shape[1])])


def measurement_mse(y1, y2) -> float:
    """Mean squared error over the m measurement entries."""
    a = y1.values if isinstance(y1, MeasurementVector) else np.asarray(y1, dtype=float)
    b = y2.values if isinstance(y2, MeasurementVector) else np.asarray(y2, dtype=float)
    if a.shape != b.shape:
        raise ValueError("measurement shape mismatch")
    return float(np.mean((a - b) ** 2))
