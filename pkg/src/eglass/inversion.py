"""Latent inversion by gradient descent with backtracking, and the
multi-restart baseline that re-solves from independent random guesses.

The objective is the measurement MSE f(z) = mean((A G(z) - y)^2); its
gradient is 2/m * J_G^T A^T (A G(z) - y), evaluated matrix-free through the
operator adjoint.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from . import generator as gen
from . import operators as ops

_DIVERGENCE_CAP = 1e6
_MAX_HALVINGS = 20


@dataclass(frozen=True)
class InversionConfig:
    max_iters: int = 500
    step_size: float = 1.0
    step_decay: float = 1.0
    init_seed: int = 0
    init_scale: float = 1.0
    stop_residual: float = 1e-6
    stop_grad_norm: float = 1e-9

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if not 0 < self.step_decay <= 1:
            raise ValueError("step_decay must lie in (0, 1]")
        if self.stop_residual < 0 or self.stop_grad_norm < 0:
            raise ValueError("stop thresholds must be nonnegative")

    def to_json(self) -> dict:
        return {
            "max_iters": self.max_iters,
            "step_size": self.step_size,
            "step_decay": self.step_decay,
            "init_seed": self.init_seed,
            "init_scale": self.init_scale,
            "stop_residual": self.stop_residual,
            "stop_grad_norm": self.stop_grad_norm,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "InversionConfig":
        allowed = {
            "max_iters", "step_size", "step_decay", "init_seed",
            "init_scale", "stop_residual", "stop_grad_norm",
        }
        unknown = set(obj) - allowed
        if unknown:
            raise ValueError(f"unknown inversion config fields: {sorted(unknown)}")
        return cls(**obj)


@dataclass
class InversionTrace:
    residuals: List[float] = field(default_factory=list)
    grad_norms: List[float] = field(default_factory=list)
    elapsed: List[float] = field(default_factory=list)
    final_z: np.ndarray | None = None
    wall_seconds: float = 0.0
    converged: bool = False
    restart_index: int = 0

    def records(self) -> List[dict]:
        return [
            {"iter": i, "residual": r, "grad_norm": g, "elapsed_s": e}
            for i, (r, g, e) in enumerate(
                zip(self.residuals, self.grad_norms, self.elapsed)
            )
        ]


class InversionDivergence(Exception):
    def __init__(self, trace: InversionTrace):
        self.trace = trace
        super().__init__(
            f"inversion diverged (residual {trace.residuals[-1]:.3e})"
        )


def _loss_and_grad(
    y: np.ndarray, op: ops.OperatorSpec, g: gen.GeneratorInstance, z: np.ndarray
) -> Tuple[float, np.ndarray]:
    x = gen.generate(g, z)
    r = ops.apply(op, x).values - y
    m = len(y)
    loss = float(np.mean(r**2))
    back = ops.adjoint(op, r).values  # A^T r
    grad = (2.0 / m) * (gen.jacobian(g, z).T @ back)
    return loss, grad


def invert(
    y,
    op: ops.OperatorSpec,
    g: gen.GeneratorInstance,
    cfg: InversionConfig,
    restart_index: int = 0,
) -> Tuple[np.ndarray, InversionTrace]:
    """Gradient descent on the measurement MSE from a seeded random start."""
    yv = y.values if isinstance(y, ops.MeasurementVector) else np.asarray(y, dtype=float)
    rng = np.random.default_rng(cfg.init_seed)
    z = cfg.init_scale * rng.standard_normal(g.spec.latent_dim)

    trace = InversionTrace(restart_index=restart_index)
    t0 = time.monotonic()
    loss, grad = _loss_and_grad(yv, op, g, z)
    for it in range(cfg.max_iters):
        gnorm = float(np.linalg.norm(grad))
        trace.residuals.append(loss)
        trace.grad_norms.append(gnorm)
        trace.elapsed.append(time.monotonic() - t0)
        if loss > _DIVERGENCE_CAP:
            trace.final_z = z
            trace.wall_seconds = time.monotonic() - t0
            raise InversionDivergence(trace)
        if loss <= cfg.stop_residual or gnorm <= cfg.stop_grad_norm:
            trace.converged = True
            break
        step = cfg.step_size * cfg.step_decay**it
        for _ in range(_MAX_HALVINGS + 1):
            z_new = z - step * grad
            r_new = ops.apply(op, gen.generate(g, z_new)).values - yv
            loss_new = float(np.mean(r_new**2))
            if loss_new <= loss:
                break
            step *= 0.5
        else:
            # no descent step found: gradient is numerically stale, stop here
            trace.converged = loss <= cfg.stop_residual
            break
        z = z_new
        loss, grad = _loss_and_grad(yv, op, g, z)
    else:
        # budget exhausted; record the final state
        trace.residuals.append(loss)
        trace.grad_norms.append(float(np.linalg.norm(grad)))
        trace.elapsed.append(time.monotonic() - t0)
        trace.converged = loss <= cfg.stop_residual

    trace.final_z = z
    trace.wall_seconds = time.monotonic() - t0
    return z, trace


def multi_restart_invert(
    y,
    op: ops.OperatorSpec,
    g: gen.GeneratorInstance,
    cfg: InversionConfig,
    n_solutions: int,
) -> List[Tuple[np.ndarray, InversionTrace]]:
    """PULSE-style baseline: independent runs with init seeds cfg.init_seed + i.

    Diverged runs are recorded with an empty solution and excluded from the
    feasible set by the caller; no deduplication of minima is attempted.
    """
    if n_solutions < 1:
        raise ValueError("n_solutions must be >= 1")
    results = []
    for i in range(n_solutions):
        cfg_i = InversionConfig(**{**cfg.to_json(), "init_seed": cfg.init_seed + i})
        try:
            z, trace = invert(y, op, g, cfg_i, restart_index=i)
        except InversionDivergence as err:
            trace = err.trace
            trace.restart_index = i
            z = trace.final_z
        results.append((z, trace))
    return results
