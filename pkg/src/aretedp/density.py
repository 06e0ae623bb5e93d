"""Grid-based numerical densities.

A continuous density is represented by exact probability masses on a
uniform grid of half-open bins [k*h, (k+1)*h).  Masses are per-bin
integrals (computed from the incomplete gamma function or the Laplace
CDF), never point evaluations: the Gamma density diverges at 0 for shape
below 1, and the bin integral absorbs that singularity exactly.

For convolution purposes a bin stands for its left edge, i.e. values are
rounded down to a multiple of the step before adding; with that convention
the Gamma-difference grid built from a Gamma grid and its reflection is
symmetric bin for bin, and the Arete grid inherits the mirror symmetry
mass[origin + k] == mass[origin - 1 - k] of the Laplace grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .distributions import AreteParams, GammaParams, LaplaceParams, StaircaseParams, staircase_normalizer

__all__ = [
    "ResolutionError",
    "GridSpec",
    "DiscretizedDensity",
    "regularized_lower_incomplete_gamma",
    "discretize_gamma",
    "discretize_laplace",
    "staircase_density_grid",
    "reflect",
    "convolve",
    "arete_density_grid",
    "default_grid",
    "cdf_from_density",
    "lattice_points",
    "grid_mean",
    "grid_variance",
    "symmetry_defect",
]

_MASS_BUDGET_TOL = 1e-9
_TAIL_WARN_LEVEL = 1e-4
_EPS = 1e-15
_FPMIN = 1e-300
_ITMAX = 600


class ResolutionError(ValueError):
    """Grid too coarse to resolve the distribution being discretized."""


# ---------------------------------------------------------------------------
# Regularized lower incomplete gamma P(a, x)
# ---------------------------------------------------------------------------

def _gamma_p_series(a: float, x: np.ndarray) -> np.ndarray:
    """Power series for P(a, x), reliable for x < a + 1 (DLMF 8.11.4)."""
    term = np.full(x.shape, 1.0 / a)
    total = term.copy()
    ap = a
    for _ in range(_ITMAX):
        ap += 1.0
        term = term * x / ap
        total += term
        if np.all(term <= _EPS * total):
            break
    log_fac = a * np.log(x) - x - math.lgamma(a)
    return total * np.exp(log_fac)


def _gamma_q_cf(a: float, x: np.ndarray) -> np.ndarray:
    """Continued fraction for Q(a, x) = 1 - P(a, x), reliable for x >= a + 1 (Lentz)."""
    b = x + 1.0 - a
    c = np.full(x.shape, 1.0 / _FPMIN)
    d = 1.0 / np.where(np.abs(b) < _FPMIN, _FPMIN, b)
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for i in range(1, _ITMAX + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = b + an / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < _EPS
        if done.all():
            break
    with np.errstate(under="ignore"):
        log_fac = a * np.log(x) - x - math.lgamma(a)
        return np.exp(log_fac) * h


def regularized_lower_incomplete_gamma(shape: float, x):
    """P(shape, x) = gamma(shape, x) / Gamma(shape), elementwise over x.

    Series expansion for x < shape + 1, continued fraction otherwise;
    relative accuracy around 1e-12 or better for shape in [1e-9, 10].
    """
    if not (math.isfinite(shape) and shape > 0.0):
        raise ValueError(f"shape must be positive, got {shape!r}")
    x_arr = np.asarray(x, dtype=np.float64)
    if np.any(x_arr < 0.0):
        raise ValueError("x must be nonnegative")
    flat = np.atleast_1d(x_arr).ravel()
    out = np.zeros(flat.shape, dtype=np.float64)
    pos = flat > 0.0
    series = pos & (flat < shape + 1.0)
    cf = pos & ~series
    if series.any():
        out[series] = _gamma_p_series(shape, flat[series])
    if cf.any():
        out[cf] = 1.0 - _gamma_q_cf(shape, flat[cf])
    out = np.clip(out, 0.0, 1.0)
    out = out.reshape(np.atleast_1d(x_arr).shape)
    return float(out[0]) if np.isscalar(x) or x_arr.ndim == 0 else out


# ---------------------------------------------------------------------------
# Grid types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of spacing `step` spanning [-half_width, +half_width]."""

    step: float
    half_width: float

    def __post_init__(self):
        if not (math.isfinite(self.step) and self.step > 0.0):
            raise ValueError(f"step must be positive, got {self.step!r}")
        if not (math.isfinite(self.half_width) and self.half_width >= 10.0 * self.step):
            raise ValueError(
                f"half_width must be at least 10 steps, got half_width={self.half_width!r} "
                f"with step={self.step!r}"
            )

    @property
    def bins_per_side(self) -> int:
        return int(round(self.half_width / self.step))


@dataclass(frozen=True)
class DiscretizedDensity:
    """Probability masses on a uniform grid of bins [(k - origin)*h, (k - origin + 1)*h).

    `truncation_tail` is the mass outside the grid; it is carried, not
    dropped, and sum(masses) + truncation_tail must equal 1 to within 1e-9.
    """

    step: float
    origin_index: int
    masses: np.ndarray
    truncation_tail: float

    def __post_init__(self):
        masses = np.asarray(self.masses, dtype=np.float64)
        masses.setflags(write=False)
        object.__setattr__(self, "masses", masses)
        if not (math.isfinite(self.step) and self.step > 0.0):
            raise ValueError(f"step must be positive, got {self.step!r}")
        if masses.ndim != 1 or masses.size == 0:
            raise ValueError("masses must be a nonempty 1-D vector")
        if np.any(masses < 0.0):
            raise ValueError("masses must be nonnegative")
        budget = float(masses.sum()) + self.truncation_tail
        if abs(budget - 1.0) > _MASS_BUDGET_TOL:
            raise ValueError(f"masses + tail must total 1 within {_MASS_BUDGET_TOL}, got {budget!r}")

    def __len__(self) -> int:
        return self.masses.size


def lattice_points(density: DiscretizedDensity) -> np.ndarray:
    """Left bin edges (k - origin)*h, the lattice values bins stand for."""
    idx = np.arange(len(density)) - density.origin_index
    return idx * density.step


def grid_mean(density: DiscretizedDensity) -> float:
    return float(np.dot(density.masses, lattice_points(density)))


def grid_variance(density: DiscretizedDensity) -> float:
    x = lattice_points(density)
    m = grid_mean(density)
    return float(np.dot(density.masses, (x - m) ** 2))


def symmetry_defect(density: DiscretizedDensity, axis: str = "edge") -> float:
    """Largest per-bin violation of the grid's mirror symmetry.

    axis="edge": pairing mass[o + k] == mass[o - 1 - k] (axis at the left
    edge of the origin bin) — the symmetry of Laplace, Staircase, and Arete
    grids.  axis="point": pairing mass[o + k] == mass[o - k] (axis at the
    origin lattice point) — the symmetry of a Gamma-difference grid built
    from a grid and its reflection.
    """
    o = density.origin_index
    m = density.masses
    if axis == "edge":
        k_max = min(len(m) - o, o)
        upper = m[o : o + k_max]
        lower = m[o - k_max : o][::-1]
        lo_cut = o - k_max
    elif axis == "point":
        k_max = min(len(m) - 1 - o, o)
        upper = m[o + 1 : o + 1 + k_max]
        lower = m[o - k_max : o][::-1]
        lo_cut = o - k_max
    else:
        raise ValueError(f"axis must be 'edge' or 'point', got {axis!r}")
    defect = float(np.max(np.abs(upper - lower))) if k_max > 0 else 0.0
    # mass outside the paired range is itself a symmetry violation
    spill = max(float(m[o + k_max + (axis == "point") :].sum()), float(m[:lo_cut].sum()))
    return max(defect, spill)


# ---------------------------------------------------------------------------
# Discretizers
# ---------------------------------------------------------------------------

def _check_resolution(step: float, scale: float, half_width: float, what: str) -> None:
    if step > scale and step > half_width / 10.0:
        raise ResolutionError(
            f"grid step {step} too coarse for {what} scale {scale} "
            f"(and exceeds half_width/10 = {half_width / 10.0})"
        )


def discretize_gamma(params: GammaParams, grid: GridSpec) -> DiscretizedDensity:
    """Exact bin masses of Gamma(shape, scale) on [0, half_width).

    Bin [k*h, (k+1)*h) carries P(shape, edge_hi/scale) - P(shape, edge_lo/scale);
    bins below 0 carry no mass and are not stored (origin_index = 0).  The
    integral form absorbs the t**(shape-1) singularity at 0 for shape < 1.
    """
    _check_resolution(grid.step, params.scale, grid.half_width, "Gamma")
    n = grid.bins_per_side
    edges = np.arange(n + 1, dtype=np.float64) * grid.step
    cdf = regularized_lower_incomplete_gamma(params.shape, edges / params.scale)
    masses = np.diff(cdf)
    tail = 1.0 - float(cdf[-1])
    return DiscretizedDensity(grid.step, 0, np.maximum(masses, 0.0), tail)


def discretize_laplace(params: LaplaceParams, grid: GridSpec) -> DiscretizedDensity:
    """Exact bin masses of Laplace(0, scale) on [-half_width, half_width).

    One side is computed from the CDF and mirrored, so the pairing
    mass[origin + k] == mass[origin - 1 - k] holds bit for bit.
    """
    _check_resolution(grid.step, params.scale, grid.half_width, "Laplace")
    n = grid.bins_per_side
    edges = np.arange(n + 1, dtype=np.float64) * grid.step
    upper_half = 0.5 * np.exp(-edges / params.scale)
    side = upper_half[:-1] - upper_half[1:]
    masses = np.concatenate([side[::-1], side])
    tail = 2.0 * float(upper_half[-1])
    return DiscretizedDensity(grid.step, n, np.maximum(masses, 0.0), tail)


def _staircase_upper_mass(x: np.ndarray, params: StaircaseParams) -> np.ndarray:
    """P(0 <= X < x) for the Staircase law, vectorised over x >= 0."""
    eps, delta, gamma = params.epsilon, params.delta_sens, params.gamma
    q = math.exp(-eps)
    a = staircase_normalizer(params)
    k = np.floor(x / delta)
    rel = x - k * delta
    period_mass = a * delta * (gamma + q * (1.0 - gamma))
    with np.errstate(under="ignore"):
        qk = np.exp(-eps * k)
    below = period_mass * (1.0 - qk) / (1.0 - q)
    inside = qk * a * (np.minimum(rel, gamma * delta) + q * np.maximum(rel - gamma * delta, 0.0))
    return below + inside


def staircase_density_grid(params: StaircaseParams, grid: GridSpec) -> DiscretizedDensity:
    """Exact bin masses of the Staircase distribution on [-half_width, half_width).

    Built from one side and mirrored, like discretize_laplace.
    """
    _check_resolution(grid.step, params.delta_sens, grid.half_width, "Staircase")
    n = grid.bins_per_side
    edges = np.arange(n + 1, dtype=np.float64) * grid.step
    upper = _staircase_upper_mass(edges, params)
    side = np.diff(upper)
    masses = np.concatenate([side[::-1], side])
    tail = 1.0 - 2.0 * float(upper[-1])
    return DiscretizedDensity(grid.step, n, np.maximum(masses, 0.0), max(tail, 0.0))


# ---------------------------------------------------------------------------
# Convolution algebra
# ---------------------------------------------------------------------------

def reflect(density: DiscretizedDensity) -> DiscretizedDensity:
    """Negate the lattice: mass at point x moves to point -x."""
    n = len(density)
    return DiscretizedDensity(
        density.step,
        n - 1 - density.origin_index,
        density.masses[::-1].copy(),
        density.truncation_tail,
    )


def convolve(a: DiscretizedDensity, b: DiscretizedDensity) -> DiscretizedDensity:
    """Distribution of the lattice sum of two independent discretized variables.

    The result tail equals 1 - sum(result masses), which is bounded above by
    the sum of the input tails.  Inputs with tails above 1e-4 trigger a
    warning: privacy-loss numbers near the edge of such grids are not
    trustworthy.
    """
    if not math.isclose(a.step, b.step, rel_tol=1e-12):
        raise ValueError(f"mismatched grid steps: {a.step} vs {b.step}")
    for side, d in (("left", a), ("right", b)):
        if d.truncation_tail > _TAIL_WARN_LEVEL:
            warnings.warn(
                f"convolving a grid with large truncation tail {d.truncation_tail:.3e} "
                f"({side} operand); widen the grid before trusting edge behaviour",
                stacklevel=2,
            )
    if min(len(a), len(b)) <= 256:
        masses = np.convolve(a.masses, b.masses)
    else:
        masses = fftconvolve(a.masses, b.masses)
        masses = np.maximum(masses, 0.0)
    tail = max(1.0 - float(masses.sum()), 0.0)
    return DiscretizedDensity(a.step, a.origin_index + b.origin_index, masses, tail)


def trim(density: DiscretizedDensity, half_width: float) -> DiscretizedDensity:
    """Restrict a grid to lattice points in [-half_width, half_width), mass outside to the tail."""
    k = int(round(half_width / density.step))
    lo = max(density.origin_index - k, 0)
    hi = min(density.origin_index + k, len(density))
    masses = density.masses[lo:hi].copy()
    tail = 1.0 - float(masses.sum())
    return DiscretizedDensity(density.step, density.origin_index - lo, masses, max(tail, 0.0))


def arete_density_grid(params: AreteParams, grid: GridSpec) -> DiscretizedDensity:
    """Arete density by discrete convolution: Gamma grid, its reflection, then Laplace.

    The raw convolution spans triple the requested half-width, but bins
    beyond it lack contributions from outside the component grids and decay
    artificially fast; the result is therefore trimmed back to the
    requested extent, where it is faithful up to the component tails.  It
    is symmetric about the origin bin and unimodal there.
    """
    g = discretize_gamma(GammaParams(params.alpha, params.theta), grid)
    gamma_diff = convolve(g, reflect(g))
    lap = discretize_laplace(LaplaceParams(params.lam), grid)
    return trim(convolve(gamma_diff, lap), grid.half_width)


def default_grid(
    params: AreteParams,
    sensitivity: float | None = None,
    step: float = 1e-3,
    tail_budget: float = 1e-6,
) -> GridSpec:
    """Grid wide enough that every component tail is below tail_budget / 4.

    Starts from half_width = max(20*theta, 20*lam, 2*sensitivity + 1) and
    widens by half-steps of 50% until the Gamma and Laplace tails fit the
    budget (two Gamma factors and one Laplace factor enter the Arete
    convolution, plus slack).
    """
    half_width = max(20.0 * params.theta, 20.0 * params.lam, 20.0 * step)
    if sensitivity is not None:
        half_width = max(half_width, 2.0 * sensitivity + 1.0)
    per_component = tail_budget / 4.0
    for _ in range(200):
        half_width = math.ceil(half_width / step) * step
        gamma_tail = 1.0 - regularized_lower_incomplete_gamma(params.alpha, half_width / params.theta)
        laplace_tail = math.exp(-half_width / params.lam)
        if gamma_tail < per_component and laplace_tail < per_component:
            break
        half_width *= 1.5
    return GridSpec(step, half_width)


def cdf_from_density(density: DiscretizedDensity) -> np.ndarray:
    """Pairs (x, F(x)) with x the right bin edges and F the inclusive running mass.

    F is monotone nondecreasing and ends at 1 - truncation_tail; for a
    mirror-symmetric grid, F at the origin-bin boundary x = 0 equals
    (1 - truncation_tail) / 2 exactly.
    """
    x = (np.arange(len(density)) - density.origin_index + 1) * density.step
    f = np.cumsum(density.masses)
    return np.column_stack([x, f])
