import json
import os

import numpy as np
import pytest

from eglass import bench, plots


def test_prepare_is_deterministic(sr_ctx):
    ctx2 = bench.prepare(sr_ctx.config)
    np.testing.assert_array_equal(ctx2.z0, sr_ctx.z0)
    np.testing.assert_array_equal(ctx2.y.values, sr_ctx.y.values)


def test_spectra_report(sr_ctx):
    spectra = bench.run_spectra(sr_ctx)
    n = sr_ctx.config.generator.latent_dim
    assert len(spectra["lambda"]) == n
    assert len(spectra["coupling"]) == n
    assert spectra["lambda"] == sorted(spectra["lambda"], reverse=True)
    assert 1 <= spectra["k_top"] <= n // 2
    assert 1 <= spectra["suggested_K"] <= n
    assert spectra["participation_ratio_y"] >= 1.0


def test_correlation_report(sr_ctx):
    rows = bench.run_correlation_report(sr_ctx)
    assert len(rows) == sr_ctx.config.generator.latent_dim
    for row in rows:
        assert 0.0 <= row["abs_d_dot_u"] <= 1.0 + 1e-12
        assert 0.0 <= row["abs_vK_dot_v"] <= 1.0 + 1e-12
    removed = [r for r in rows if r["removed"]]
    assert removed
    assert all(r["abs_d_dot_u"] <= 1e-10 for r in removed)


def test_residual_contrast_rows(sr_ctx):
    rows = bench.run_residual_contrast(sr_ctx)
    assert len(rows) == len(set(abs(e) for e in sr_ctx.config.exploration.eta_grid))
    for row in rows:
        assert row["projected_residual"] < row["raw_residual"]
        assert row["eta"] > 0


def test_writers_and_manifest(tmp_path, sr_ctx):
    rows = bench.run_correlation_report(sr_ctx)
    csv_path = str(tmp_path / "correlation.csv")
    bench.write_csv(csv_path, rows)
    with open(csv_path) as fh:
        header = fh.readline().strip().split(",")
    assert header == list(rows[0].keys())
    with pytest.raises(ValueError):
        bench.write_csv(str(tmp_path / "empty.csv"), [])

    json_path = str(tmp_path / "spectra.json")
    bench.write_json(json_path, bench.run_spectra(sr_ctx))
    with open(json_path) as fh:
        assert "lambda" in json.load(fh)

    manifest_path = bench.write_manifest(str(tmp_path), sr_ctx.config,
                                         [csv_path, json_path])
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    assert manifest["config_hash"] == sr_ctx.config.config_hash()
    assert manifest["outputs"] == ["correlation.csv", "spectra.json"]
    assert not os.path.exists(manifest_path + ".tmp")


def test_figures_render(tmp_path, sr_ctx):
    spectra = bench.run_spectra(sr_ctx)
    corr = bench.run_correlation_report(sr_ctx)
    contrast = bench.run_residual_contrast(sr_ctx)
    p1 = tmp_path / "spectra.png"
    p2 = tmp_path / "correlation.png"
    p3 = tmp_path / "contrast.png"
    plots.spectra_figure(spectra, str(p1))
    plots.correlation_figure(corr, 0.1, str(p2))
    plots.contrast_figure(contrast, 1e-2, str(p3))
    for p in (p1, p2, p3):
        assert p.stat().st_size > 0


def test_gallery_renders(tmp_path, sr_ctx):
    from eglass.generator import generate

    sigs = [generate(sr_ctx.g, sr_ctx.z0).values for _ in range(3)]
    path = tmp_path / "gallery.png"
    plots.solution_gallery(sigs, (32, 32), str(path))
    assert path.stat().st_size > 0
