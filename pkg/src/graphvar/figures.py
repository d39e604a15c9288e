"""Optional matplotlib renderings of solve output, written to files only."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .exhaustion import ExhaustionReport
from .graphs import WeightedGraph

__all__ = ["save_exhaustion_figures", "save_poincare_figure"]


def save_exhaustion_figures(
    report: ExhaustionReport, graph: WeightedGraph, outdir: str, stem: str = "solve"
) -> list[str]:
    """Write level-history and solution-profile figures; returns the paths."""
    os.makedirs(outdir, exist_ok=True)
    paths = []

    ks = [rec.k for rec in report.levels]
    fig, (ax_e, ax_r) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ax_e.plot(ks, [rec.energy for rec in report.levels], "o-", color="tab:blue")
    ax_e.set_xlabel("radius k")
    ax_e.set_ylabel("level energy")
    ax_e.set_title("energy per level")
    gaps = [max(rec.gap, 1e-300) for rec in report.levels]
    residuals = [max(rec.global_residual, 1e-300) for rec in report.levels]
    ax_r.semilogy(ks, gaps, "o-", label="cauchy gap", color="tab:orange")
    ax_r.semilogy(ks, residuals, "s-", label="residual", color="tab:green")
    ax_r.axhline(report.tol, color="gray", ls="--", lw=0.8, label="tol")
    ax_r.set_xlabel("radius k")
    ax_r.set_title("stabilization on the witness ball")
    ax_r.legend(fontsize=8)
    fig.tight_layout()
    path = os.path.join(outdir, f"{stem}_levels.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)

    rho = graph.distances_from(report.center)
    values = report.u_final.to_array(graph)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(rho, values, ".", ms=4, alpha=0.6, color="tab:blue")
    ax.set_xlabel("hop distance from center")
    ax.set_ylabel("u")
    ax.set_title(f"solution profile ({report.equation})")
    fig.tight_layout()
    path = os.path.join(outdir, f"{stem}_profile.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)
    return paths


def save_poincare_figure(values: list[tuple[int, float]], outdir: str) -> list[str]:
    os.makedirs(outdir, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot([k for k, _ in values], [c for _, c in values], "o-", color="tab:blue")
    ax.set_xlabel("radius k")
    ax.set_ylabel("Poincare constant")
    fig.tight_layout()
    path = os.path.join(outdir, "poincare.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]
