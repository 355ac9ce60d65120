"""Report figures rendered to files with the Agg backend.

Each function takes already-computed report data and a target path, so the
plotting layer stays free of any numerics.
"""

from __future__ import annotations

from typing import Dict, List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_RC = {
    "figure.figsize": (7.0, 4.3),
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
}


def spectra_figure(spectra: dict, path: str) -> None:
    """Side-by-side eigenvalue bars and the coupling magnitude heatmap."""
    lam = np.asarray(spectra["lambda"])
    omega = np.asarray(spectra["omega"])
    c = np.abs(np.asarray(spectra["coupling"]))
    idx = np.arange(1, len(lam) + 1)
    with plt.rc_context(_RC):
        fig, (ax1, ax2) = plt.subplots(1, 2)
        floor = 1e-16
        ax1.bar(idx - 0.2, np.maximum(lam, floor), width=0.4, label="measurement")
        ax1.bar(idx + 0.2, np.maximum(omega, floor), width=0.4, label="perceptual")
        ax1.set_yscale("log")
        ax1.set_xlabel("eigenvalue index")
        ax1.set_ylabel("eigenvalue")
        ax1.axvline(spectra["k_top"] + 0.5, color="k", ls="--", lw=0.8)
        ax1.legend(fontsize=7)
        im = ax2.imshow(c, cmap="viridis", vmin=0.0, vmax=1.0,
                        extent=(0.5, len(lam) + 0.5, len(lam) + 0.5, 0.5))
        ax2.grid(False)
        ax2.set_xlabel("perceptual index")
        ax2.set_ylabel("measurement index")
        fig.colorbar(im, ax=ax2, fraction=0.046)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def correlation_figure(rows: List[Dict[str, float]], tau: float, path: str) -> None:
    """Correlation of the raw and projected directions against the
    measurement eigenbasis, with the threshold marked."""
    j = [r["j"] for r in rows]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.plot(j, [r["abs_vK_dot_u"] for r in rows], "o-", label="raw source")
        ax.plot(j, [r["abs_d_dot_u"] for r in rows], "s-", label="projected")
        removed = [r["j"] for r in rows if r["removed"]]
        if removed:
            ax.axvspan(min(removed) - 0.5, max(removed) + 0.5,
                       color="tab:red", alpha=0.1, label="removed set")
        ax.axhline(tau, color="k", ls="--", lw=0.8, label="threshold")
        ax.set_yscale("symlog", linthresh=1e-12)
        ax.set_xlabel("measurement eigenvalue index")
        ax.set_ylabel("|correlation|")
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def contrast_figure(rows: List[Dict[str, float]], threshold: float, path: str) -> None:
    """Measurement residual and perceptual movement for raw versus projected
    steps at matched sizes."""
    etas = [r["eta"] for r in rows]
    with plt.rc_context(_RC):
        fig, (ax1, ax2) = plt.subplots(1, 2)
        ax1.plot(etas, [r["raw_residual"] for r in rows], "o-", label="raw")
        ax1.plot(etas, [r["projected_residual"] for r in rows], "s-", label="projected")
        ax1.axhline(threshold, color="k", ls="--", lw=0.8, label="feasible")
        ax1.set_yscale("log")
        ax1.set_xlabel("step size")
        ax1.set_ylabel("measurement residual")
        ax1.legend(fontsize=7)
        ax2.plot(etas, [r["raw_perceptual"] for r in rows], "o-", label="raw")
        ax2.plot(etas, [r["projected_perceptual"] for r in rows], "s-", label="projected")
        ax2.set_xlabel("step size")
        ax2.set_ylabel("perceptual distance")
        ax2.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def solution_gallery(signals, shape, path: str, per_row: int = 5) -> None:
    """Grid of reconstructed signals as images."""
    n = len(signals)
    rows = max(1, (n + per_row - 1) // per_row)
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(rows, per_row,
                                 figsize=(1.6 * per_row, 1.6 * rows))
        axes = np.atleast_1d(axes).ravel()
        for ax in axes:
            ax.axis("off")
        for ax, sig in zip(axes, signals):
            ax.imshow(np.asarray(sig).reshape(shape), cmap="gray")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
