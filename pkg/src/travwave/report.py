"""Figure rendering for the report path: branch diagrams, periodic-family
panels, and simulation snapshots, written to files next to the CSV output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .continuation import Branch
from .simulate import FieldSnapshot, ParticleSnapshot

__all__ = [
    "branch_colors",
    "plot_c_mu_diagram",
    "plot_K_c_diagram",
    "plot_periodic_family",
    "plot_snapshots",
    "save_figure",
]

branch_colors = {
    "back": "black",
    "front": "red",
    "pulse1": "blue",
    "pulse2": "blue",
    "hopf_locus": "green",
}


def save_figure(fig, path: Path, svg: bool) -> Path:
    out = path.with_suffix(".svg" if svg else ".png")
    fig.savefig(out, bbox_inches="tight", dpi=150)
    plt.close(fig)
    return out


def plot_c_mu_diagram(branches: list[Branch], K: float, path: Path, svg: bool,
                      orbits=None) -> Path:
    ncols = 2 if orbits else 1
    fig, axes = plt.subplots(1, ncols, figsize=(5.5 * ncols, 4.2))
    ax = axes[0] if ncols > 1 else axes
    for br in branches:
        if not br.points:
            continue
        ax.plot(br.column("c"), br.column("mu"),
                color=branch_colors.get(br.kind, "gray"), lw=1.4, label=br.kind)
    ax.set_xlabel("c")
    ax.set_ylabel("mu")
    ax.set_title(f"connection branches, K={K:g}")
    ax.legend(fontsize=8)
    if orbits:
        ax2 = axes[1]
        for label, (u, w) in orbits.items():
            ax2.plot(u, w, lw=1.0, label=label)
        ax2.set_xlabel("u")
        ax2.set_ylabel("w")
        ax2.legend(fontsize=8)
        ax2.set_title("phase-plane orbits")
    return save_figure(fig, path, svg)


def plot_K_c_diagram(branches: list[Branch], path: Path, svg: bool) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    color_seq = {"back": "black", "front": "red", "pulse1": "blue", "pulse2": "green"}
    for br in branches:
        if not br.points:
            continue
        ax.plot(br.column("K"), br.column("c"),
                color=color_seq.get(br.kind, "gray"), lw=1.4, label=br.kind)
    ax.set_xlabel("K")
    ax.set_ylabel("c")
    ax.set_title("branches under mu = 2 tau K - 1")
    ax.legend(fontsize=8)
    return save_figure(fig, path, svg)


def plot_periodic_family(branch: Branch, orbits, path: Path, svg: bool,
                         title: str = "") -> Path:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
    ax1.plot(branch.column("mu"), branch.column("max_u"), "b.-", ms=3, lw=0.9)
    ax1.set_xlabel("mu")
    ax1.set_ylabel("max u")
    ax1.set_title(title or "periodic family")
    for label, (u, w) in orbits.items():
        ax2.plot(u, w, lw=1.0, label=label)
    ax2.set_xlabel("u")
    ax2.set_ylabel("w")
    ax2.legend(fontsize=8)
    return save_figure(fig, path, svg)


def plot_snapshots(pde_snaps: list[FieldSnapshot], times, path: Path, svg: bool,
                   micro_snaps: list[ParticleSnapshot] | None = None,
                   extra_pde: list[FieldSnapshot] | None = None) -> Path:
    fig, axes = plt.subplots(1, len(times), figsize=(5.5 * len(times), 3.8))
    if len(times) == 1:
        axes = [axes]

    def nearest(snaps, t):
        return min(snaps, key=lambda s: abs(s.t - t))

    for ax, t in zip(axes, times):
        s = nearest(pde_snaps, t)
        ax.plot(s.x, s.v, "-", color="C0", lw=1.4, label="v (spectral run)")
        if extra_pde is not None:
            s2 = nearest(extra_pde, t)
            ax.plot(s2.x, s2.v, "--", color="C1", lw=1.2, label="v (constant viscosity)")
        if micro_snaps is not None:
            m = nearest(micro_snaps, t)
            L = pde_snaps[0].x[-1] + (pde_snaps[0].x[1] - pde_snaps[0].x[0])
            ax.plot(np.mod(m.x, L), m.xdot, "o", mfc="none", mec="k", ms=3,
                    label="car-following")
        ax.set_xlabel("x")
        ax.set_ylabel("v")
        ax.set_title(f"t = {s.t:g}")
        ax.legend(fontsize=7)
    return save_figure(fig, path, svg)
