"""Acceptance suite: one test per release criterion, tolerances pinned.

Criteria cover metric-tensor correctness against an independent
finite-difference oracle, an exact-null construction for linear generators,
direction invariants, measurement/perceptual decoupling, feasibility and
diversity of emitted solutions, the timing contrast with the multi-restart
baseline, the correlation-profile contract, and the numerical substrate.
"""

import time

import numpy as np
import pytest

from conftest import operator_zoo
from eglass import bench
from eglass import generator as gen
from eglass import operators as ops
from eglass import perceptual as perc
from eglass.explore import (
    ExplorationParams,
    build_direction,
    default_k_top,
    explore,
)
from eglass.generator import GeneratorSpec, generate, instantiate, jacobian
from eglass.linalg import project_out, rayleigh, sym_eig
from eglass.metrics import (
    coupling,
    fd_hessian_oracle,
    measurement_metric,
    perceptual_metric,
)
from eglass.perceptual import FeatureExtractorSpec


def rel_frobenius(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-30)


def test_criterion_1_metric_tensors_match_fd_oracle(small_features):
    """Both metric tensors match the finite-difference Hessian oracle within
    2e-3 relative Frobenius on 10 seeded triples, in under 60 s."""
    t0 = time.monotonic()
    zoo = operator_zoo()
    checked = 0
    for seed in range(10):
        spec = GeneratorSpec(
            kind="mlp", latent_dim=6, signal_shape=(8, 8),
            hidden_widths=(16, 32), activation="tanh", weight_seed=seed,
        )
        g = instantiate(spec)
        op = zoo[seed % len(zoo)]
        z0 = np.random.default_rng(100 + seed).standard_normal(6)

        h_y = measurement_metric(g, op, z0)
        y0 = ops.apply(op, generate(g, z0)).values

        def dist_y(z):
            diff = ops.apply(op, generate(g, z)).values - y0
            return float(diff @ diff)

        assert rel_frobenius(h_y, fd_hessian_oracle(dist_y, z0)) < 2e-3, (
            f"measurement metric mismatch for triple {seed}"
        )

        h_x = perceptual_metric(g, small_features, z0)
        x0 = generate(g, z0)

        def dist_x(z):
            return perc.perceptual_distance(small_features, generate(g, z), x0)

        assert rel_frobenius(h_x, fd_hessian_oracle(dist_x, z0)) < 2e-3, (
            f"perceptual metric mismatch for triple {seed}"
        )
        checked += 1
    assert checked == 10
    assert time.monotonic() - t0 < 60.0


def test_criterion_2_linear_generator_exact_null():
    """With a linear generator and every nonzero eigenvalue removed, steps
    along the projected direction leave the measurements unchanged to
    machine precision for step sizes 0.1, 1, and 10."""
    spec = GeneratorSpec(kind="linear", latent_dim=8, signal_shape=(8, 8),
                         weight_seed=4)
    g = instantiate(spec)
    op = ops.OperatorSpec(kind="random_projection", signal_shape=(8, 8),
                          m=4, proj_seed=2)
    z0 = np.random.default_rng(5).standard_normal(8)
    h_y = measurement_metric(g, op, z0)
    basis = sym_eig(h_y)
    nonzero = [k for k in range(1, 9) if basis.value(k) > 1e-12]
    assert 0 < len(nonzero) < 8  # null space exists
    d = project_out(np.random.default_rng(6).standard_normal(8), basis, nonzero)
    y0 = ops.apply(op, generate(g, z0)).values
    for eta in (0.1, 1.0, 10.0):
        diff = ops.apply(op, generate(g, z0 + eta * d)).values - y0
        assert float(diff @ diff) <= 1e-18, f"null step leaked at eta={eta}"


@pytest.mark.parametrize("ctx_name", ["sr_ctx", "ip_ctx", "cs_ctx"])
def test_criterion_3_direction_invariants(ctx_name, request):
    """Every emitted direction is unit norm, orthogonal to its removed set,
    has quadratic form below both the retained spectrum and the raw source
    vector, and the coupling matrix is orthogonal."""
    ctx = request.getfixturevalue(ctx_name)
    mp = ctx.metrics
    params = ctx.config.exploration
    result = explore(ctx.g, ctx.config.operator, ctx.config.features, ctx.y,
                     ctx.z0, params, ctx.config.n_solutions, mp)
    assert result.directions
    k_top = default_k_top(mp, params)
    for direction in result.directions:
        d = direction.d
        assert abs(np.linalg.norm(d) - 1.0) <= 1e-12
        removed_corr = max(abs(d @ mp.eig_y.vector(j))
                           for j in direction.removed_set)
        assert removed_corr <= 1e-10
        quad = rayleigh(mp.h_y, d)
        assert quad <= mp.eig_y.value(k_top + 1) + 1e-10
        v_k = mp.eig_x.vector(direction.source_index)
        assert quad <= rayleigh(mp.h_y, v_k) + 1e-10
    c = coupling(mp.eig_y, mp.eig_x)
    assert np.max(np.abs(c.T @ c - np.eye(mp.eig_y.dim))) <= 1e-8


@pytest.mark.parametrize("ctx_name", ["sr_ctx", "ip_ctx"])
def test_criterion_4_decoupling_contrast(ctx_name, request):
    """At matched step sizes, the projected direction keeps at most 0.2x the
    raw source direction's measurement residual while retaining at least
    0.25x its perceptual movement. Runtime under 120 s."""
    t0 = time.monotonic()
    ctx = request.getfixturevalue(ctx_name)
    rows = bench.run_residual_contrast(ctx)
    assert rows
    for row in rows:
        assert row["projected_residual"] <= 0.2 * row["raw_residual"], (
            f"residual not suppressed at eta={row['eta']:.4f}"
        )
        assert row["projected_perceptual"] >= 0.25 * row["raw_perceptual"], (
            f"perceptual movement lost at eta={row['eta']:.4f}"
        )
    assert time.monotonic() - t0 < 120.0


@pytest.mark.parametrize("ctx_name", ["sr_ctx", "ip_ctx", "cs_ctx"])
def test_criterion_5_feasible_diverse_solutions(ctx_name, request):
    """Each preset yields 10 solutions under the 1e-2 residual threshold
    whose mean pairwise perceptual distance clears the self-distance floor
    by a factor of 10."""
    ctx = request.getfixturevalue(ctx_name)
    cfg = ctx.config
    result = explore(ctx.g, cfg.operator, cfg.features, ctx.y, ctx.z0,
                     cfg.exploration, 10, ctx.metrics)
    assert result.complete
    assert len(result.records) == 10
    assert all(r.measurement_residual <= 1e-2 for r in result.records)
    xs = [r.x for r in result.records]
    pairwise = [perc.perceptual_distance(cfg.features, xs[i], xs[j])
                for i in range(10) for j in range(i + 1, 10)]
    floor = max(perc.perceptual_distance(cfg.features, x, x) for x in xs)
    mean_pd = float(np.mean(pairwise))
    assert mean_pd > 0
    assert mean_pd >= 10.0 * floor


@pytest.mark.parametrize("ctx_name", ["sr_ctx", "ip_ctx"])
def test_criterion_6_timing_beats_multi_restart(ctx_name, request):
    """Producing 10 solutions by exploration (one inversion plus the metric
    build plus steps) takes at most a quarter of the multi-restart total,
    single-threaded, within a 10 minute budget."""
    t0 = time.monotonic()
    ctx = request.getfixturevalue(ctx_name)
    timing = bench.run_timing(ctx)
    assert timing.explored.feasible_count == 10
    assert timing.baseline.feasible_count > 0, "baseline found nothing to race"
    assert timing.explored.total_seconds <= timing.baseline.total_seconds / 4.0, (
        f"speedup only {timing.speedup:.2f}x"
    )
    assert time.monotonic() - t0 < 600.0


@pytest.mark.parametrize("ctx_name", ["sr_ctx", "ip_ctx"])
def test_criterion_7_correlation_profile(ctx_name, request):
    """The projected direction is below threshold against every dominant
    measurement eigenvector yet keeps at least half the raw source vector's
    peak perceptual alignment."""
    ctx = request.getfixturevalue(ctx_name)
    params = ctx.config.exploration
    rows = bench.run_correlation_report(ctx)
    k_top = default_k_top(ctx.metrics, params)
    top_block = [r for r in rows if r["j"] <= k_top]
    assert all(r["abs_d_dot_u"] <= params.tau for r in top_block)
    peak_raw = max(r["abs_vK_dot_v"] for r in rows)
    peak_projected = max(r["abs_d_dot_v"] for r in rows)
    assert peak_projected >= 0.5 * peak_raw


def test_criterion_8_numerical_substrate(small_features):
    """Generator and feature Jacobians match central differences within 1e-6
    max-abs, adjoint probes hold at 1e-10 for every operator kind, and the
    eigensolver reconstructs within 1e-8 relative."""
    spec = GeneratorSpec(kind="mlp", latent_dim=5, signal_shape=(8, 8),
                         hidden_widths=(12,), activation="tanh", weight_seed=8)
    g = instantiate(spec)
    z = np.random.default_rng(9).standard_normal(5)
    jac = jacobian(g, z)
    step = 1e-6
    for i in range(5):
        e = np.zeros(5)
        e[i] = step
        fd = (generate(g, z + e).values - generate(g, z - e).values) / (2 * step)
        assert np.max(np.abs(jac[:, i] - fd)) < 1e-6

    x = generate(g, z)
    jf = perc.feature_jacobian(small_features, x)
    for i in (0, 31, 63):
        e = np.zeros(64)
        e[i] = step
        fd = (
            perc.features(small_features, gen.SignalTensor(x.values + e, x.shape))
            - perc.features(small_features, gen.SignalTensor(x.values - e, x.shape))
        ) / (2 * step)
        assert np.max(np.abs(jf[:, i] - fd)) < 1e-6

    rng = np.random.default_rng(10)
    for op in operator_zoo():
        for _ in range(3):
            xv = rng.standard_normal(op.n)
            yv = rng.standard_normal(op.output_dim)
            lhs = ops.apply(op, xv).values @ yv
            rhs = xv @ ops.adjoint(op, yv).values
            assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs)), op.kind

    a = rng.standard_normal((16, 16))
    a = 0.5 * (a + a.T)
    basis = sym_eig(a)
    recon = basis.eigenvectors @ np.diag(basis.eigenvalues) @ basis.eigenvectors.T
    assert np.linalg.norm(recon - a) / np.linalg.norm(a) <= 1e-8
