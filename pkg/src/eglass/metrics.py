"""Latent metric tensors, their eigenbases, coupling, and anisotropy reports.

The measurement metric is J^T J for J the Jacobian of z -> A G(z); the
perceptual metric is the Gauss-Newton tensor of the feature embedding of
G(z). Both are exact Hessians of half the corresponding squared distance at
the base point, which the finite-difference oracle verifies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import generator as gen
from . import operators as ops
from . import perceptual as perc
from .linalg import EigenBasis, symmetrize, sym_eig


@dataclass(frozen=True)
class LatentMetricPair:
    h_y: np.ndarray
    h_x: np.ndarray
    z0: np.ndarray
    eig_y: EigenBasis
    eig_x: EigenBasis


@dataclass(frozen=True)
class AnisotropyProfile:
    spectrum: np.ndarray  # descending, clamped at 0
    cumulative_fraction: np.ndarray
    participation_ratio: float


def measurement_metric(
    g: gen.GeneratorInstance, op: ops.OperatorSpec, z0: np.ndarray
) -> np.ndarray:
    """J^T J for J the (m x n_z) Jacobian of z -> A G(z) at z0."""
    jg = gen.jacobian(g, z0)  # (n, n_z)
    aj = ops.apply_matrix(op, jg)  # (m, n_z)
    return symmetrize(aj.T @ aj)


def perceptual_metric(
    g: gen.GeneratorInstance, fe: perc.FeatureExtractorSpec, z0: np.ndarray
) -> np.ndarray:
    """Gauss-Newton tensor of z -> features(G(z)) at z0."""
    x0 = gen.generate(g, z0)
    jg = gen.jacobian(g, z0)
    jf = perc.feature_jacobian(fe, x0)  # (feature_len, n)
    j = jf @ jg  # (feature_len, n_z)
    return symmetrize(j.T @ j)


def fd_hessian_oracle(
    distance_fn: Callable[[np.ndarray], float],
    z0: np.ndarray,
    step: float = 1e-4,
) -> np.ndarray:
    """Central second differences of half the squared distance at z0.

    Independent of the analytic Jacobian path; distance_fn(z0) must be 0.
    """
    if not 1e-5 <= step <= 1e-2:
        raise ValueError("step must lie in [1e-5, 1e-2]")
    z0 = np.asarray(z0, dtype=float)
    n = len(z0)
    f0 = distance_fn(z0)
    hess = np.empty((n, n))
    e = np.eye(n) * step
    for i in range(n):
        hess[i, i] = (
            distance_fn(z0 + e[i]) - 2.0 * f0 + distance_fn(z0 - e[i])
        ) / (2.0 * step**2)
        for j in range(i + 1, n):
            v = (
                distance_fn(z0 + e[i] + e[j])
                - distance_fn(z0 + e[i] - e[j])
                - distance_fn(z0 - e[i] + e[j])
                + distance_fn(z0 - e[i] - e[j])
            ) / (8.0 * step**2)
            hess[i, j] = v
            hess[j, i] = v
    if not np.all(np.isfinite(hess)):
        raise ValueError("distance function produced NaN/Inf under probing")
    return symmetrize(hess)


def clamped_eig(h: np.ndarray) -> EigenBasis:
    """Eigendecomposition with negative round-off eigenvalues clamped to 0."""
    basis = sym_eig(h)
    vals = np.maximum(basis.eigenvalues, 0.0)
    return EigenBasis(vals, basis.eigenvectors)


def latent_metrics(
    g: gen.GeneratorInstance,
    op: ops.OperatorSpec,
    fe: perc.FeatureExtractorSpec,
    z0: np.ndarray,
) -> LatentMetricPair:
    h_y = measurement_metric(g, op, z0)
    h_x = perceptual_metric(g, fe, z0)
    return LatentMetricPair(h_y, h_x, np.asarray(z0, dtype=float),
                            clamped_eig(h_y), clamped_eig(h_x))


def coupling(eig_y: EigenBasis, eig_x: EigenBasis) -> np.ndarray:
    """C = U^T V between the two eigenbases; orthogonal by construction."""
    if eig_y.dim != eig_x.dim:
        raise ValueError("eigenbasis dimension mismatch")
    c = eig_y.eigenvectors.T @ eig_x.eigenvectors
    ortho = np.max(np.abs(c.T @ c - np.eye(eig_y.dim)))
    if ortho > 1e-8:
        raise ValueError(f"coupling matrix lost orthogonality ({ortho:.2e})")
    return c


def anisotropy_profile(eigenvalues: Sequence[float]) -> AnisotropyProfile:
    vals = np.maximum(np.asarray(eigenvalues, dtype=float), 0.0)
    vals = np.sort(vals)[::-1]
    total = vals.sum()
    if total <= 0:
        return AnisotropyProfile(vals, np.zeros_like(vals), 0.0)
    cum = np.cumsum(vals) / total
    pr = float(total**2 / np.sum(vals**2))
    return AnisotropyProfile(vals, cum, pr)
