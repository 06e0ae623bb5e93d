"""Empirical privacy-loss scanning and the closed-form certificates."""

import math

import numpy as np
import pytest

from aretedp import (
    AreteParams,
    GridSpec,
    LaplaceParams,
    StaircaseParams,
    analytic_ratio_bound,
    arete_density_grid,
    default_grid,
    discretize_laplace,
    empirical_privacy_loss,
    parameterize_arete,
    privacy_loss_curve,
    staircase_density_grid,
    staircase_loss_curve,
    verify_parameter_setting,
)
from aretedp.mechanisms import Mode
from aretedp.privacy import loss_detail


@pytest.fixture(scope="module")
def arete24():
    params = parameterize_arete(24.0, 1.0)
    grid = default_grid(params, 1.0)
    return params, grid, arete_density_grid(params, grid)


# ---------------------------------------------------------------------------
# Empirical loss
# ---------------------------------------------------------------------------

def test_laplace_loss_is_shift_over_scale():
    eps = 8.0
    lam = 1.0 / eps
    d = discretize_laplace(LaplaceParams(lam), GridSpec(1e-3, 3.0))
    loss = empirical_privacy_loss(d, 1.0)
    # log-density is piecewise linear with slope 1/lam, so the loss is eps
    # up to one grid step of relative error
    assert loss == pytest.approx(eps, rel=2e-3)


def test_loss_zero_shift(arete24):
    _, _, d = arete24
    assert empirical_privacy_loss(d, 0.0) == 0.0


def test_arete_loss_below_epsilon(arete24):
    _, _, d = arete24
    assert empirical_privacy_loss(d, 1.0) <= 24.0


def test_loss_shift_validation(arete24):
    _, _, d = arete24
    with pytest.raises(ValueError):
        empirical_privacy_loss(d, -0.5)
    with pytest.raises(ValueError):
        empirical_privacy_loss(d, 1e9)


def test_loss_rounding_reported(arete24):
    _, _, d = arete24
    detail = loss_detail(d, 1.00042)
    assert detail.shift_bins == 1000
    assert detail.shift_rounding == pytest.approx(0.00042, abs=1e-9)


def test_sub_sensitivity_shifts_bounded_by_sensitivity_loss(arete24):
    _, _, d = arete24
    at_delta = empirical_privacy_loss(d, 1.0)
    for a in (0.1, 0.25, 0.5, 0.75, 0.999):
        assert empirical_privacy_loss(d, a) <= at_delta + 1e-12


def test_loss_direction_symmetry(arete24):
    # scanning up equals scanning down on a mirror-symmetric grid
    _, _, d = arete24
    s = 1000
    m = d.masses
    floor = 1e-15 * m.max()
    adm = m >= floor
    logm = np.where(adm, np.log(np.where(adm, m, 1.0)), np.nan)
    valid = adm[:-s] & adm[s:]
    diffs = (logm[:-s] - logm[s:])[valid]
    assert diffs.max() == pytest.approx(-diffs.min(), rel=1e-9)


# ---------------------------------------------------------------------------
# Loss curves
# ---------------------------------------------------------------------------

def test_privacy_loss_curve_monotone(arete24):
    _, _, d = arete24
    profile = privacy_loss_curve(d, 2.0, 41, sensitivity=1.0)
    assert profile.losses[0] == 0.0
    assert np.all(np.diff(profile.losses) >= -1e-12)
    assert profile.eps_hat == pytest.approx(empirical_privacy_loss(d, 1.0), rel=1e-12)


def test_privacy_loss_curve_no_step_discontinuity(arete24):
    _, _, d = arete24
    profile = privacy_loss_curve(d, 2.0, 81)
    spacing_bins = (profile.shifts[1] - profile.shifts[0]) / d.step
    max_jump = float(np.abs(np.diff(profile.losses)).max())
    assert max_jump <= spacing_bins * profile.step_error_estimate * (1.0 + 1e-9)


def test_privacy_loss_curve_validation(arete24):
    _, grid, d = arete24
    with pytest.raises(ValueError):
        privacy_loss_curve(d, 2.0, 1)
    with pytest.raises(ValueError):
        privacy_loss_curve(d, grid.half_width * 10, 5)


def test_staircase_loss_curve_steps():
    eps, delta = 2.0, 1.0
    shifts = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5]
    losses = staircase_loss_curve(eps, delta, shifts)
    assert list(losses) == [0.0, eps, eps, 2 * eps, 2 * eps, 3 * eps]


@pytest.mark.parametrize("shift_mult", [0.5, 1.5])
def test_staircase_analytic_curve_matches_grid_maximization(shift_mult):
    # brute-force max log ratio over the exact piecewise-constant grid
    eps, delta = 2.0, 1.0
    p = StaircaseParams(eps, delta)
    h = 1e-3
    d = staircase_density_grid(p, GridSpec(h, 8.0))
    shift = shift_mult * delta
    measured = empirical_privacy_loss(d, shift)
    analytic = float(staircase_loss_curve(eps, delta, [shift])[0])
    # bins straddling step edges blur the ratio by at most one bin's worth
    assert measured == pytest.approx(analytic, abs=eps * h / delta + 1e-9)


# ---------------------------------------------------------------------------
# Analytic bound
# ---------------------------------------------------------------------------

def test_analytic_bound_certifies_eps20():
    params = parameterize_arete(20.0, 1.0)
    report = analytic_ratio_bound(params, 1.0, epsilon=20.0)
    assert report.assumptions_hold()
    assert report.log_bound <= 20.0
    assert report.bound_value <= math.exp(20.0)
    assert report.epsilon_certified


def test_analytic_bound_records_violation():
    params = AreteParams(0.1, 0.4, 0.4)  # lam = theta violates lam <= theta/2
    report = analytic_ratio_bound(params, 1.0, epsilon=50.0)
    assert not report.epsilon_certified
    assert "lam <= theta/2" in report.failed_assumptions()


def test_analytic_bound_inverse_in_lam():
    base = AreteParams(0.01, 0.2, 0.02)
    doubled = AreteParams(0.01, 0.2, 0.04)
    r1 = analytic_ratio_bound(base, 1.0)
    r2 = analytic_ratio_bound(doubled, 1.0)
    assert r1.bound_value / r2.bound_value == pytest.approx(2.0, rel=1e-12)


def test_analytic_bound_c_gamma_fallback():
    tiny = AreteParams(1e-12, 0.2, 1e-12)
    report = analytic_ratio_bound(tiny, 1.0)
    assert report.c_gamma_exact is None
    assert report.c_gamma_used == 0.5


def test_verify_parameter_setting_certifies():
    assert verify_parameter_setting(24.0, 1.0).epsilon_certified


def test_verify_parameter_setting_domain_failure_reported():
    report = verify_parameter_setting(19.0, 1.0)
    assert not report.epsilon_certified
    assert any("20 + 4*ln" in name for name in report.failed_assumptions())


def test_verify_parameter_setting_boundary():
    # epsilon exactly at the domain edge for sensitivity e
    report = verify_parameter_setting(20.0 + 4.0 * math.log(math.e), math.e)
    assert report.epsilon_certified


def test_certificates_consistent():
    # the analytic guarantee dominates the grid measurement
    for eps, sens in [(20.0, 1.0), (24.0, 1.0), (30.0, 2.0)]:
        report = verify_parameter_setting(eps, sens)
        assert report.epsilon_certified
        params = parameterize_arete(eps, sens, Mode.PERMISSIVE)
        grid = default_grid(params, sens)
        measured = empirical_privacy_loss(arete_density_grid(params, grid), sens)
        assert measured <= eps
        assert measured <= report.log_bound
