"""Dense symmetric eigendecomposition and orthogonal projection kernels.

All routines operate on plain numpy arrays. Eigenvector indices exposed to
callers are 1-based (index 1 = top eigenvalue), matching the convention used
throughout the exploration code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np


class EigenConvergenceError(Exception):
    """Jacobi sweeps failed to drive the off-diagonal norm below tolerance."""

    def __init__(self, off_diag_norm: float, sweeps: int):
        self.off_diag_norm = off_diag_norm
        self.sweeps = sweeps
        super().__init__(
            f"eigensolver did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {off_diag_norm:.3e})"
        )


class CollapseError(Exception):
    """Vector lies (numerically) in the span of the removed eigenvectors."""


def check_finite(a: np.ndarray, name: str = "array") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains NaN or Inf")
    return a


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Return 0.5*(M + M^T) as a float array, checking shape and finiteness."""
    m = check_finite(m, "matrix")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected square matrix, got shape {m.shape}")
    return 0.5 * (m + m.T)


@dataclass(frozen=True)
class EigenBasis:
    """Eigenvalues sorted descending; eigenvectors as orthonormal columns.

    Column j (0-based) pairs with eigenvalues[j]. Use vector(k) for the
    1-based accessor.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def vector(self, k: int) -> np.ndarray:
        """k-th top eigenvector, 1-based (k=1 is the top)."""
        if not 1 <= k <= self.dim:
            raise IndexError(f"eigenvector index {k} out of range 1..{self.dim}")
        return self.eigenvectors[:, k - 1]

    def value(self, k: int) -> float:
        if not 1 <= k <= self.dim:
            raise IndexError(f"eigenvalue index {k} out of range 1..{self.dim}")
        return float(self.eigenvalues[k - 1])


def _jacobi_rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Zero a[p,q] with a Givens rotation, updating a and the accumulator v."""
    apq = a[p, q]
    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
    # smaller root of t^2 + 2t*theta - 1 = 0, numerically stable form
    t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 else 1.0
    c = 1.0 / np.hypot(t, 1.0)
    s = t * c

    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p - s * row_q
    a[q, :] = s * row_p + c * row_q
    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - s * col_q
    a[:, q] = s * col_p + c * col_q
    a[p, q] = 0.0
    a[q, p] = 0.0

    vp = v[:, p].copy()
    vq = v[:, q].copy()
    v[:, p] = c * vp - s * vq
    v[:, q] = s * vp + c * vq


def sym_eig(m: np.ndarray, max_sweeps: int = 100) -> EigenBasis:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Deterministic: fixed sweep order, eigenvalues sorted descending, each
    eigenvector's largest-magnitude entry made positive.
    """
    a = symmetrize(m).copy()
    n = a.shape[0]
    if n > 4096:
        raise ValueError(f"matrix size {n} exceeds 4096 cap")
    if n == 0:
        return EigenBasis(np.zeros(0), np.zeros((0, 0)))

    v = np.eye(n)
    scale = np.linalg.norm(a, "fro")
    tol = 1e-14 * max(scale, 1.0)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2) * 2.0)
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) > 0.0:
                    _jacobi_rotate(a, v, p, q)
    else:
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2) * 2.0)
        raise EigenConvergenceError(off, max_sweeps)

    vals = np.diag(a).copy()
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = v[:, order]
    # sign convention: largest-magnitude entry of each eigenvector positive
    for j in range(n):
        i = int(np.argmax(np.abs(vecs[:, j])))
        if vecs[i, j] < 0:
            vecs[:, j] = -vecs[:, j]
    return EigenBasis(vals, vecs)


def project_out(
    d: np.ndarray,
    basis: EigenBasis,
    indices: Iterable[int],
    collapse_tol: float = 1e-6,
) -> np.ndarray:
    """Remove the listed eigenvector components from d, renormalizing after
    each removal. Indices are 1-based. Raises CollapseError if d falls into
    the span of the removed set.
    """
    d = check_finite(d, "direction").copy()
    nrm = np.linalg.norm(d)
    if nrm < collapse_tol:
        raise CollapseError("input direction has (near) zero norm")
    d /= nrm
    for k in sorted(set(int(i) for i in indices)):
        u = basis.vector(k)
        d = d - (d @ u) * u
        nrm = np.linalg.norm(d)
        if nrm < collapse_tol:
            raise CollapseError(
                f"direction collapsed while removing eigenvector {k}"
            )
        d /= nrm
    return d


def rayleigh(m: np.ndarray, v: np.ndarray) -> float:
    """Quadratic form v^T M v for a unit vector v."""
    m = np.asarray(m, dtype=float)
    v = np.asarray(v, dtype=float)
    if m.shape != (len(v), len(v)):
        raise ValueError(f"shape mismatch: matrix {m.shape}, vector {len(v)}")
    return float(v @ m @ v)
