"""Shared oracles and helpers for the test suite."""

import math

import mpmath as mp
import numpy as np
import pytest

from aretedp import GammaParams, discretize_gamma, regularized_lower_incomplete_gamma


def quadrature_gamma_p(shape: float, x: float) -> float:
    """Adaptive-quadrature oracle for the regularized lower incomplete gamma.

    Independent of the series/continued-fraction implementation: tanh-sinh
    quadrature at 50 digits.  For shape < 1 the substitution u = t**shape
    removes the endpoint singularity exactly:
        P(a, x) = int_0^{x**a} exp(-u**(1/a)) du / Gamma(a + 1).
    """
    if x == 0.0:
        return 0.0
    with mp.workdps(50):
        a = mp.mpf(shape)
        xx = mp.mpf(x)
        if shape >= 1.0:
            val = mp.quad(lambda t: t ** (a - 1) * mp.e ** (-t), [0, xx]) / mp.gamma(a)
        else:
            upper = xx**a
            val = mp.quad(lambda u: mp.e ** (-(u ** (1 / a))), [0, upper / 2, upper]) / mp.gamma(a + 1)
        return float(val)


def mc_mean_tolerance(variance: float, n: int, sigmas: float = 4.0) -> float:
    """Tolerance band for a Monte Carlo mean estimate."""
    return sigmas * math.sqrt(variance / n)


def variance_estimator_se(variance: float, fourth_cumulant: float, n: int) -> float:
    """Standard error of the sample variance: sqrt((kappa4 + 2*sigma^4) / n)."""
    return math.sqrt((fourth_cumulant + 2.0 * variance**2) / n)


def gamma_sandwich_holds(alpha: float, theta: float, gamma_diff_grid, grid, rtol: float = 1e-9):
    """Check the density sandwich on a Gamma-difference grid, bin by bin.

    Upper: each bin's mass is at most the integral of the Gamma density
    envelope over the bin widened by one step (the lattice convolution
    places a value at most one bin from its true sum).  Lower: each
    adjacent bin pair holds at least c_dg * integral of the shifted Gamma
    envelope over one bin.  Bins within 6*theta of the truncation edge are
    skipped: there the grid's own truncation deficit dominates, not the
    density law.
    """
    h = grid.step
    dg = alpha * theta
    c_dg = regularized_lower_incomplete_gamma(alpha, dg / theta)
    o = gamma_diff_grid.origin_index
    m = gamma_diff_grid.masses

    def p(x):
        return regularized_lower_incomplete_gamma(alpha, np.maximum(x, 0.0) / theta)

    w_max = min(len(m) - 1 - o, int((grid.half_width - 6.0 * theta) / h))
    if w_max < 2:
        raise ValueError("grid too narrow for a meaningful sandwich check")
    w = np.arange(0, w_max - 1)
    x = w * h
    upper_env = p(x + h) - p(np.maximum(x - h, 0.0))
    upper_env[0] = 2.0 * p(np.array([h]))[0]
    lower_env = c_dg * (p(x + h + dg) - p(x + dg))
    mw = m[o : o + w_max - 1]
    mw_next = m[o + 1 : o + w_max]
    upper_ok = bool(np.all(mw <= upper_env * (1.0 + rtol) + 1e-15))
    lower_ok = bool(np.all(mw + mw_next >= lower_env * (1.0 - rtol) - 1e-15))
    return upper_ok, lower_ok


@pytest.fixture(scope="session")
def gamma_small_shape_grid():
    """A spiky small-shape Gamma discretization reused across tests."""
    from aretedp import GridSpec

    params = GammaParams(math.exp(-5), 0.2)
    grid = GridSpec(1e-3, 4.0)
    return params, grid, discretize_gamma(params, grid)
