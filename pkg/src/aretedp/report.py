"""Figure rendering for the report path.

Each report writes a PNG figure and the delimited data behind it side by
side, so plots are reproducible from their own CSVs.  Covers the four
standard views: density shapes of the three mechanisms, CDF comparisons,
privacy-loss-vs-shift curves, and the density found by the parameter
search against the Laplace baseline.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .density import (
    DiscretizedDensity,
    GridSpec,
    arete_density_grid,
    cdf_from_density,
    default_grid,
    discretize_laplace,
    lattice_points,
    staircase_density_grid,
)
from .distributions import LaplaceParams, StaircaseParams
from .mechanisms import Mode, parameterize_arete
from .privacy import privacy_loss_curve, staircase_loss_curve
from .rng import RngStream
from .search import SearchConfig, local_search

__all__ = [
    "density_shapes_report",
    "cdf_comparison_report",
    "privacy_loss_report",
    "search_density_report",
    "render_all",
]


def _write_csv(path: Path, meta: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {meta}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _density_xy(density: DiscretizedDensity):
    x = lattice_points(density)
    return x, density.masses / density.step


def density_shapes_report(out_dir: Path, epsilon: float, sensitivity: float, step: float = 1e-3):
    """Side-by-side density shapes of the Laplace, Staircase, and Arete mechanisms."""
    out_dir = Path(out_dir)
    params = parameterize_arete(epsilon, sensitivity, Mode.PERMISSIVE)
    grid = default_grid(params, sensitivity, step=step)
    arete = arete_density_grid(params, grid)
    show = GridSpec(step, max(3.0 * sensitivity, 30 * step))
    lap = discretize_laplace(LaplaceParams(sensitivity / epsilon), show)
    sc = staircase_density_grid(StaircaseParams(epsilon, sensitivity), show)

    fig, axes = plt.subplots(1, 3, figsize=(12, 3.2), sharey=False)
    for ax, (name, dens) in zip(
        axes, [("Laplace", lap), ("Staircase", sc), ("Arete", arete)]
    ):
        x, y = _density_xy(dens)
        ax.plot(x, y, lw=1.0)
        ax.set_title(f"{name} (eps={epsilon:g})")
        ax.set_xlim(-3.0 * sensitivity, 3.0 * sensitivity)
        ax.set_xlabel("t")
    axes[0].set_ylabel("density")
    fig.tight_layout()
    png = out_dir / f"densities_eps{epsilon:g}.png"
    fig.savefig(png, dpi=150)
    plt.close(fig)

    rows = []
    for name, dens in [("laplace", lap), ("staircase", sc), ("arete", arete)]:
        x, y = _density_xy(dens)
        rows.extend((name, f"{xi:.6g}", f"{yi:.10g}") for xi, yi in zip(x, y))
    csv_path = out_dir / f"densities_eps{epsilon:g}.csv"
    _write_csv(csv_path, f"density shapes | eps={epsilon} sensitivity={sensitivity} step={step}",
               ["mechanism", "x", "density"], rows)
    return [png, csv_path]


def cdf_comparison_report(out_dir: Path, epsilons, sensitivity: float, step: float = 1e-3):
    """Arete vs Laplace vs Staircase CDFs at each epsilon (standard parameterization)."""
    out_dir = Path(out_dir)
    epsilons = list(epsilons)
    fig, axes = plt.subplots(1, len(epsilons), figsize=(4 * len(epsilons), 3.2), squeeze=False)
    rows = []
    for ax, eps in zip(axes[0], epsilons):
        params = parameterize_arete(eps, sensitivity, Mode.PERMISSIVE)
        grid = default_grid(params, sensitivity, step=step)
        arete = cdf_from_density(arete_density_grid(params, grid))
        show = GridSpec(step, grid.half_width)
        lap = cdf_from_density(discretize_laplace(LaplaceParams(sensitivity / eps), show))
        sc = cdf_from_density(staircase_density_grid(StaircaseParams(eps, sensitivity), show))
        for name, curve in [("arete", arete), ("laplace", lap), ("staircase", sc)]:
            ax.plot(curve[:, 0], curve[:, 1], lw=1.0, label=name)
            rows.extend((f"{eps:g}", name, f"{x:.6g}", f"{f:.10g}") for x, f in curve[:: max(1, len(curve) // 2000)])
        ax.set_xlim(-1.5 * sensitivity, 1.5 * sensitivity)
        ax.set_title(f"eps={eps:g}")
        ax.set_xlabel("t")
        ax.legend(fontsize=8)
    axes[0][0].set_ylabel("F(t)")
    fig.tight_layout()
    png = out_dir / "cdf_comparison.png"
    fig.savefig(png, dpi=150)
    plt.close(fig)
    csv_path = out_dir / "cdf_comparison.csv"
    _write_csv(csv_path, f"empirical CDFs | eps={epsilons} sensitivity={sensitivity} step={step}",
               ["epsilon", "mechanism", "x", "F"], rows)
    return [png, csv_path]


def privacy_loss_report(out_dir: Path, epsilon: float, sensitivity: float, step: float = 1e-3,
                        max_shift_mult: float = 3.0, points: int = 121):
    """Worst-case privacy loss vs query-output shift: Staircase steps vs Arete's smooth curve."""
    out_dir = Path(out_dir)
    params = parameterize_arete(epsilon, sensitivity, Mode.PERMISSIVE)
    grid = default_grid(params, sensitivity, step=step)
    density = arete_density_grid(params, grid)
    max_shift = max_shift_mult * sensitivity
    profile = privacy_loss_curve(density, max_shift, points, sensitivity=sensitivity)
    sc_shifts = np.linspace(0.0, max_shift, 600)
    sc_loss = staircase_loss_curve(epsilon, sensitivity, sc_shifts)

    fig, axes = plt.subplots(1, 2, figsize=(8, 3.2), sharey=True)
    axes[0].step(sc_shifts, sc_loss, where="post", lw=1.0)
    axes[0].set_title(f"Staircase (eps={epsilon:g})")
    axes[1].plot(profile.shifts, profile.losses, lw=1.0)
    axes[1].set_title(f"Arete (eps={epsilon:g}, eps_hat={profile.eps_hat:.2f})")
    for ax in axes:
        ax.set_xlabel("query output difference a")
    axes[0].set_ylabel("worst-case privacy loss")
    fig.tight_layout()
    png = out_dir / f"privacy_loss_eps{epsilon:g}.png"
    fig.savefig(png, dpi=150)
    plt.close(fig)

    rows = [("arete", f"{s:.6g}", f"{l:.10g}") for s, l in zip(profile.shifts, profile.losses)]
    rows += [("staircase", f"{s:.6g}", f"{l:.10g}") for s, l in zip(sc_shifts, sc_loss)]
    csv_path = out_dir / f"privacy_loss_eps{epsilon:g}.csv"
    _write_csv(csv_path, f"privacy loss vs shift | eps={epsilon} sensitivity={sensitivity} step={step}",
               ["mechanism", "shift", "loss"], rows)
    return [png, csv_path]


def search_density_report(out_dir: Path, eps_targets, sensitivity: float, seed: int = 0,
                          step: float = 1e-3):
    """Density of locally searched Arete parameters vs the same-epsilon Laplace."""
    out_dir = Path(out_dir)
    eps_targets = list(eps_targets)
    fig, axes = plt.subplots(1, len(eps_targets), figsize=(4.5 * len(eps_targets), 3.4), squeeze=False)
    rows = []
    for ax, eps in zip(axes[0], eps_targets):
        trace = local_search(SearchConfig(eps_target=eps, sensitivity=sensitivity), RngStream(seed))
        best = trace.best
        grid = default_grid(best, sensitivity, step=step)
        arete = arete_density_grid(best, grid)
        lap = discretize_laplace(LaplaceParams(sensitivity / eps), GridSpec(step, grid.half_width))
        for name, dens in [("arete", arete), ("laplace", lap)]:
            x, y = _density_xy(dens)
            ax.plot(x, y, lw=1.0, label=name)
            keep = max(1, len(x) // 4000)
            rows.extend(
                (f"{eps:g}", name, f"{xi:.6g}", f"{yi:.10g}") for xi, yi in zip(x[::keep], y[::keep])
            )
        ax.set_xlim(-1.2 * sensitivity, 1.2 * sensitivity)
        ax.set_title(
            f"eps={eps:g}: searched (a={best.alpha:.3g}, th={best.theta:.3g}, lam={best.lam:.3g})\n"
            f"eps_hat={trace.best_eps_hat:.3f}, bound={trace.best_objective:.4f} vs laplace {sensitivity/eps:.4f}"
        )
        ax.set_xlabel("t")
        ax.legend(fontsize=8)
    axes[0][0].set_ylabel("density")
    fig.tight_layout()
    png = out_dir / "search_densities.png"
    fig.savefig(png, dpi=150)
    plt.close(fig)
    csv_path = out_dir / "search_densities.csv"
    _write_csv(csv_path, f"searched Arete densities | eps_targets={eps_targets} "
               f"sensitivity={sensitivity} seed={seed} step={step}",
               ["epsilon", "mechanism", "x", "density"], rows)
    return [png, csv_path]


def render_all(out_dir, sensitivity: float = 1.0, seed: int = 0) -> list:
    """Render the full report set into out_dir and return the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    written += density_shapes_report(out_dir, 10.0, sensitivity)
    written += cdf_comparison_report(out_dir, [5.0, 10.0, 15.0], sensitivity)
    written += privacy_loss_report(out_dir, 10.0, sensitivity)
    written += search_density_report(out_dir, [6.0, 8.0], sensitivity, seed=seed)
    return written
