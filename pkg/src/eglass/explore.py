"""Construction of measurement-null, perceptually active latent directions
and enumeration of feasible alternative reconstructions.

A direction starts as the K-th top eigenvector of the perceptual metric,
gets projected orthogonal to the dominant eigenvectors of the measurement
metric, and is re-projected against any eigenvector whose correlation with
the running direction exceeds the threshold, until none does. Stepping z0
along the final direction changes the measurements only to second order, so
feasible solutions can be emitted almost for free.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import generator as gen
from . import operators as ops
from . import perceptual as perc
from .linalg import CollapseError, project_out, rayleigh
from .metrics import LatentMetricPair, coupling, latent_metrics

_NEGLIGIBLE_EIG = 1e-9  # relative to the top eigenvalue


@dataclass(frozen=True)
class ExplorationParams:
    K: Optional[int] = None  # None: auto-select from the coupling matrix
    k_top: Optional[int] = None  # None: energy rule with cap
    tau: float = 0.1
    rho: float = 0.99
    eta_grid: Tuple[float, ...] = (0.5, 1.0, 2.0, 4.0)
    feasibility_threshold: float = 1e-2
    max_outer_iters: int = 20
    # an eigenvector counts as measurement-significant for the expansion loop
    # only above this eigenvalue fraction of the top; with the raw machine
    # floor every full-rank metric would force the expansion into collapse
    active_eig_ratio: float = 1e-2

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")
        if not 0 < self.rho <= 1:
            raise ValueError("rho must lie in (0, 1]")
        if not 0 < self.active_eig_ratio < 1:
            raise ValueError("active_eig_ratio must lie in (0, 1)")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1")
        if self.feasibility_threshold <= 0:
            raise ValueError("feasibility threshold must be positive")
        object.__setattr__(self, "eta_grid", tuple(self.eta_grid))

    def to_json(self) -> dict:
        return {
            "K": self.K,
            "k_top": self.k_top,
            "tau": self.tau,
            "rho": self.rho,
            "eta_grid": list(self.eta_grid),
            "feasibility_threshold": self.feasibility_threshold,
            "max_outer_iters": self.max_outer_iters,
            "active_eig_ratio": self.active_eig_ratio,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ExplorationParams":
        allowed = {
            "K", "k_top", "tau", "rho", "eta_grid",
            "feasibility_threshold", "max_outer_iters", "active_eig_ratio",
        }
        unknown = set(obj) - allowed
        if unknown:
            raise ValueError(f"unknown exploration fields: {sorted(unknown)}")
        obj = dict(obj)
        if "eta_grid" in obj:
            obj["eta_grid"] = tuple(obj["eta_grid"])
        return cls(**obj)


@dataclass(frozen=True)
class ExplorationDirection:
    d: np.ndarray  # unit latent vector
    source_index: int  # K, 1-based into the perceptual eigenbasis
    removed_set: Tuple[int, ...]  # 1-based indices into the measurement basis
    residual_correlations: np.ndarray  # |d . u_j| for all j
    rayleigh_y: float
    rayleigh_x: float

    @property
    def direction_id(self) -> str:
        return f"v{self.source_index}"


@dataclass(frozen=True)
class SolutionRecord:
    z: np.ndarray
    x: gen.SignalTensor
    measurement_residual: float
    perceptual_from_base: float
    eta: float
    direction_id: str
    feasible: bool
    elapsed_s: float

    def to_json(self) -> dict:
        return {
            "z": self.z.tolist(),
            "x": self.x.values.tolist(),
            "shape": list(self.x.shape),
            "measurement_residual": self.measurement_residual,
            "perceptual_from_base": self.perceptual_from_base,
            "eta": self.eta,
            "direction_id": self.direction_id,
            "feasible": self.feasible,
            "elapsed_s": self.elapsed_s,
        }


@dataclass
class ExplorationResult:
    records: List[SolutionRecord]
    directions: List[ExplorationDirection]
    complete: bool
    diagnostic: str
    wall_seconds: float
    metrics: LatentMetricPair = field(repr=False, default=None)


def default_k_top(metrics_pair: LatentMetricPair, params: ExplorationParams) -> int:
    """Smallest k whose cumulative measurement-spectrum energy reaches rho,
    capped at n_z // 2."""
    if params.k_top is not None:
        return params.k_top
    vals = metrics_pair.eig_y.eigenvalues
    total = vals.sum()
    cap = max(1, len(vals) // 2)
    if total <= 0:
        return 0
    cum = np.cumsum(vals) / total
    k = int(np.searchsorted(cum, params.rho) + 1)
    return min(k, cap)


def select_K(c: np.ndarray, params: ExplorationParams, k_top: int) -> int:
    """Smallest column K of C whose top-k_top block stays below tau;
    falls back to k_top + 1."""
    n = c.shape[1]
    for k in range(1, n + 1):
        if k_top == 0 or np.max(np.abs(c[:k_top, k - 1])) <= params.tau:
            return k
    return min(k_top + 1, n)


def build_direction(
    metrics_pair: LatentMetricPair,
    params: ExplorationParams,
    K: Optional[int] = None,
) -> ExplorationDirection:
    """Project v^K out of the dominant measurement eigenvectors, expanding
    the removal set until no retained eigenvector correlates above tau."""
    eig_y, eig_x = metrics_pair.eig_y, metrics_pair.eig_x
    if K is None:
        K = params.K
    if K is None:
        k0 = default_k_top(metrics_pair, params)
        K = select_K(coupling(eig_y, eig_x), params, k0)
    if not 1 <= K <= eig_x.dim:
        raise ValueError(f"source index K={K} out of range 1..{eig_x.dim}")

    k_top = default_k_top(metrics_pair, params)
    removed = set(range(1, k_top + 1))
    v_k = eig_x.vector(K)
    # collapse here means v^K has no component outside the dominant
    # measurement subspace: the caller should retry with K-1
    d = project_out(v_k, eig_y, removed)

    lam = eig_y.eigenvalues
    floor = max(lam[0], 0.0) * max(params.active_eig_ratio, _NEGLIGIBLE_EIG)
    active = [j + 1 for j in range(eig_y.dim) if lam[j] > floor]
    for _ in range(params.max_outer_iters):
        offenders = [
            j for j in active
            if j not in removed and abs(d @ eig_y.vector(j)) > params.tau
        ]
        if not offenders:
            break
        try:
            # re-project the pristine v^K against the enlarged set: removal
            # vectors are orthonormal, so one pass is exact
            d_new = project_out(v_k, eig_y, removed | set(offenders))
        except CollapseError:
            # expanding further would annihilate the direction; keep the
            # last valid projection
            break
        removed.update(offenders)
        d = d_new

    residual_corr = np.abs(d @ eig_y.eigenvectors)
    return ExplorationDirection(
        d=d,
        source_index=K,
        removed_set=tuple(sorted(removed)),
        residual_correlations=residual_corr,
        rayleigh_y=rayleigh(metrics_pair.h_y, d),
        rayleigh_x=rayleigh(metrics_pair.h_x, d),
    )


def line_search_eta(
    g: gen.GeneratorInstance,
    op: ops.OperatorSpec,
    y,
    z0: np.ndarray,
    d: np.ndarray,
    threshold: float,
    eta_upper: float,
) -> float:
    """Largest eta in (0, eta_upper] keeping the measurement MSE under the
    threshold, by doubling then bisection to relative precision 1e-3."""
    yv = y.values if isinstance(y, ops.MeasurementVector) else np.asarray(y, dtype=float)

    def res(eta: float) -> float:
        return ops.measurement_mse(
            ops.apply(op, gen.generate(g, z0 + eta * d)).values, yv
        )

    if res(eta_upper) <= threshold:
        return eta_upper
    lo = 1e-6 * eta_upper
    if res(lo) > threshold:
        return 0.0
    hi = lo
    while res(2.0 * hi) <= threshold and 2.0 * hi < eta_upper:
        hi *= 2.0
    lo, hi = hi, min(2.0 * hi, eta_upper)
    while (hi - lo) > 1e-3 * hi:
        mid = 0.5 * (lo + hi)
        if res(mid) <= threshold:
            lo = mid
        else:
            hi = mid
    return lo


def eta_scale_for(metrics_pair: LatentMetricPair, K: int) -> float:
    """Natural step scale 1/sqrt(omega_K) from the perceptual spectrum."""
    omega = metrics_pair.eig_x.value(K)
    return 1.0 / np.sqrt(max(omega, 1e-12))


def evaluate_step(
    g: gen.GeneratorInstance,
    op: ops.OperatorSpec,
    fe: perc.FeatureExtractorSpec,
    y,
    z0: np.ndarray,
    direction: ExplorationDirection,
    eta: float,
    threshold: float,
    t_start: float,
) -> SolutionRecord:
    yv = y.values if isinstance(y, ops.MeasurementVector) else np.asarray(y, dtype=float)
    z = z0 + eta * direction.d
    x = gen.generate(g, z)
    residual = ops.measurement_mse(ops.apply(op, x).values, yv)
    p = perc.perceptual_distance(fe, x, gen.generate(g, z0))
    return SolutionRecord(
        z=z,
        x=x,
        measurement_residual=residual,
        perceptual_from_base=p,
        eta=eta,
        direction_id=direction.direction_id,
        feasible=residual <= threshold,
        elapsed_s=time.monotonic() - t_start,
    )


def explore(
    g: gen.GeneratorInstance,
    op: ops.OperatorSpec,
    fe: perc.FeatureExtractorSpec,
    y,
    z0: np.ndarray,
    params: ExplorationParams,
    n_solutions: int,
    metrics_pair: Optional[LatentMetricPair] = None,
) -> ExplorationResult:
    """Emit up to n_solutions feasible records by stepping along projected
    directions sourced from v^K, v^{K-1}, ...; geometry is computed once at z0
    and frozen."""
    t0 = time.monotonic()
    if n_solutions < 0:
        raise ValueError("n_solutions must be >= 0")
    if metrics_pair is None:
        metrics_pair = latent_metrics(g, op, fe, z0)
    records: List[SolutionRecord] = []
    directions: List[ExplorationDirection] = []
    if n_solutions == 0:
        return ExplorationResult([], [], True, "nothing requested",
                                 time.monotonic() - t0, metrics_pair)

    k_top = default_k_top(metrics_pair, params)
    if params.K is not None:
        k_start = params.K
    else:
        k_start = select_K(coupling(metrics_pair.eig_y, metrics_pair.eig_x),
                           params, k_top)

    collapsed = 0
    for K in range(k_start, 0, -1):
        try:
            direction = build_direction(metrics_pair, params, K=K)
        except CollapseError:
            collapsed += 1
            continue
        directions.append(direction)
        scale = eta_scale_for(metrics_pair, K)
        etas = sorted(set(abs(e) * scale for e in params.eta_grid))
        has_zero = 0.0 in (abs(e) for e in params.eta_grid)
        eta_max = line_search_eta(
            g, op, y, z0, direction.d,
            params.feasibility_threshold,
            eta_upper=max(etas) if max(etas, default=0) > 0 else 1.0,
        )
        candidates: List[float] = [0.0] if has_zero else []
        for e in etas:
            if e == 0.0 or e > eta_max:
                continue
            candidates.extend([e, -e])
        for eta in candidates:
            records.append(
                evaluate_step(g, op, fe, y, z0, direction, eta,
                              params.feasibility_threshold, t0)
            )
            if len(records) >= n_solutions:
                return ExplorationResult(
                    records, directions, True, "ok",
                    time.monotonic() - t0, metrics_pair,
                )

    diag = (
        f"direction budget exhausted: {len(records)}/{n_solutions} feasible "
        f"records from {len(directions)} directions ({collapsed} collapsed)"
    )
    return ExplorationResult(records, directions, False, diag,
                             time.monotonic() - t0, metrics_pair)
