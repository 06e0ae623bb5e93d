"""Mechanics of the constrained parameter search."""

import math

import pytest

from aretedp import (
    AreteParams,
    GridSpec,
    Objective,
    SearchConfig,
    evaluate_candidate,
    local_search,
    parameterize_arete,
)
from aretedp.mechanisms import Mode
from aretedp.rng import RngStream

# a coarse grid keeps the unit tests quick; the acceptance suite runs the
# default-resolution searches
COARSE = GridSpec(4e-3, 14.0)


def test_zero_budget_returns_seed():
    config = SearchConfig(eps_target=24.0, sensitivity=1.0, max_iters=0, grid=COARSE)
    trace = local_search(config, RngStream(1))
    seed = parameterize_arete(24.0, 1.0, Mode.PERMISSIVE)
    assert trace.best == seed
    assert trace.evaluations == 0
    assert math.isfinite(trace.best_eps_hat)
    assert len(trace.iterations) == 1


def test_greedy_never_degrades_feasible_incumbent():
    config = SearchConfig(eps_target=24.0, sensitivity=1.0, max_iters=60, grid=COARSE)
    trace = local_search(config, RngStream(2))
    seed_obj = trace.iterations[0].objective_value
    assert trace.iterations[0].feasible
    assert trace.best_objective <= seed_obj
    accepted = [c.objective_value for c in trace.iterations if c.accepted]
    assert all(b <= a for a, b in zip(accepted, accepted[1:]))
    assert trace.feasible


def test_search_reproducible():
    config = SearchConfig(eps_target=24.0, sensitivity=1.0, max_iters=40, grid=COARSE)
    t1 = local_search(config, RngStream(3))
    t2 = local_search(config, RngStream(3))
    assert t1.iterations == t2.iterations
    assert t1.best == t2.best
    assert t1.mc_expected_abs == t2.mc_expected_abs


def test_evaluate_candidate_deterministic():
    config = SearchConfig(eps_target=24.0, sensitivity=1.0, grid=COARSE, margin=0.01)
    params = parameterize_arete(24.0, 1.0)
    assert evaluate_candidate(params, config) == evaluate_candidate(params, config)


def test_evaluate_candidate_standard_params_feasible():
    config = SearchConfig(eps_target=24.0, sensitivity=1.0, grid=COARSE, margin=0.05)
    obj, eps_hat, feasible = evaluate_candidate(parameterize_arete(24.0, 1.0), config)
    assert feasible
    assert eps_hat <= 24.0
    assert obj == pytest.approx(2.0 * math.exp(-6.0) / 6.0 + math.exp(-6.0), rel=1e-12)


def test_wide_laplace_limit_feasible_but_poor():
    # lam large: tiny privacy loss, large objective
    config = SearchConfig(eps_target=6.0, sensitivity=1.0, grid=GridSpec(4e-3, 60.0), margin=0.05)
    params = AreteParams(1e-6, 0.2, 2.5)
    obj, eps_hat, feasible = evaluate_candidate(params, config)
    assert feasible
    assert eps_hat < 1.0
    assert obj > 1.0


def test_variance_objective():
    config = SearchConfig(
        eps_target=24.0, sensitivity=1.0, objective=Objective.VARIANCE, max_iters=30, grid=COARSE
    )
    trace = local_search(config, RngStream(4))
    p = trace.best
    assert trace.best_objective == pytest.approx(2.0 * p.alpha * p.theta**2 + 2.0 * p.lam**2, rel=1e-12)


def test_returned_best_passes_half_step_verification():
    config = SearchConfig(eps_target=24.0, sensitivity=1.0, max_iters=40, grid=COARSE)
    trace = local_search(config, RngStream(5))
    assert trace.feasible
    assert trace.eps_hat_refined <= 24.0 - trace.margin


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(eps_target=-1.0, sensitivity=1.0)
    with pytest.raises(ValueError):
        SearchConfig(eps_target=6.0, sensitivity=1.0, step_factors=(0.9,))
    with pytest.raises(ValueError):
        SearchConfig(eps_target=6.0, sensitivity=1.0, max_iters=-1)
