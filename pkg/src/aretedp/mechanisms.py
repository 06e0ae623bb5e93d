"""Output-perturbation mechanisms: Arete, Laplace, and Staircase.

All three add symmetric zero-median noise calibrated to (epsilon,
sensitivity).  The Arete parameterization alpha = lam = e**(-epsilon/4),
theta = 4*sensitivity/epsilon carries an analytic guarantee only on the
domain sensitivity >= 2/e and epsilon >= 20 + 4*ln(sensitivity); Strict
mode enforces that domain, Permissive mode applies the same formulas
anywhere and leaves certification to the privacy-analysis tools (the
regime where the guarantee is empirical, not proven).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .distributions import (
    AreteParams,
    LaplaceParams,
    StaircaseParams,
    arete_moments,
    sample_arete,
    sample_laplace,
    sample_staircase,
)
from .rng import RngStream

__all__ = [
    "DomainError",
    "Mode",
    "MechanismKind",
    "MechanismConfig",
    "QueryResult",
    "ErrorRow",
    "strict_epsilon_threshold",
    "in_strict_domain",
    "parameterize_arete",
    "apply_mechanism",
    "error_table",
]


class DomainError(ValueError):
    """Parameters outside the analytically certified domain in Strict mode."""


class Mode(enum.Enum):
    STRICT = "strict"
    PERMISSIVE = "permissive"


class MechanismKind(enum.Enum):
    ARETE = "arete"
    LAPLACE = "laplace"
    STAIRCASE = "staircase"


@dataclass(frozen=True)
class MechanismConfig:
    kind: MechanismKind
    epsilon: float
    sensitivity: float
    mode: Mode = Mode.STRICT

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if not (math.isfinite(self.sensitivity) and self.sensitivity > 0.0):
            raise ValueError(f"sensitivity must be positive, got {self.sensitivity!r}")


@dataclass(frozen=True)
class QueryResult:
    true_value: float
    noisy_value: float
    noise: float


def strict_epsilon_threshold(sensitivity: float) -> float:
    """Smallest epsilon the analytic guarantee covers: 20 + 4*ln(sensitivity)."""
    return 20.0 + 4.0 * math.log(sensitivity)


def in_strict_domain(epsilon: float, sensitivity: float) -> bool:
    return sensitivity >= 2.0 / math.e and epsilon >= strict_epsilon_threshold(sensitivity)


def parameterize_arete(epsilon: float, sensitivity: float, mode: Mode = Mode.STRICT) -> AreteParams:
    """Standard Arete parameters alpha = lam = e**(-eps/4), theta = 4*sensitivity/eps.

    Strict mode raises DomainError outside the certified domain; Permissive
    mode returns the same formulas anywhere.  The analytic guarantee does
    not cover the permissive regime: verify empirically, e.g. with
    verify_parameter_setting or the empirical privacy-loss scan.
    """
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    if sensitivity <= 0.0:
        raise ValueError(f"sensitivity must be positive, got {sensitivity!r}")
    if mode is Mode.STRICT:
        if sensitivity < 2.0 / math.e:
            raise DomainError(
                f"sensitivity {sensitivity} violates sensitivity >= 2/e = {2.0 / math.e:.6f}"
            )
        threshold = strict_epsilon_threshold(sensitivity)
        if epsilon < threshold:
            raise DomainError(
                f"epsilon {epsilon} violates epsilon >= 20 + 4*ln(sensitivity) = {threshold:.6f}"
            )
    scale = math.exp(-epsilon / 4.0)
    return AreteParams(alpha=scale, theta=4.0 * sensitivity / epsilon, lam=scale)


# Test-surface-only deterministic hook: passed in place of an RngStream, it
# makes apply_mechanism add the distributions' median noise (0 for all three
# symmetric laws).  Not constructible through the CLI.
_ZERO_NOISE_HOOK = object()


def apply_mechanism(config: MechanismConfig, query_value: float, rng) -> QueryResult:
    """Add calibrated noise to a query value.

    Arete uses parameterize_arete under config.mode (Strict-mode domain
    violations propagate as DomainError); Laplace uses scale
    sensitivity/epsilon; Staircase uses the default step split.
    """
    if rng is _ZERO_NOISE_HOOK:
        noise = 0.0
    elif config.kind is MechanismKind.ARETE:
        params = parameterize_arete(config.epsilon, config.sensitivity, config.mode)
        noise = sample_arete(params, rng)
    elif config.kind is MechanismKind.LAPLACE:
        noise = sample_laplace(LaplaceParams(config.sensitivity / config.epsilon), rng)
    elif config.kind is MechanismKind.STAIRCASE:
        noise = sample_staircase(StaircaseParams(config.epsilon, config.sensitivity), rng)
    else:
        raise ValueError(f"unknown mechanism kind {config.kind!r}")
    return QueryResult(true_value=query_value, noisy_value=query_value + noise, noise=noise)


@dataclass(frozen=True)
class ErrorRow:
    """One epsilon's worth of the mechanism comparison table."""

    epsilon: float
    laplace_expected_abs: float
    arete_bound: float
    arete_mc: float
    staircase_mc: float
    arete_certified_domain: bool


def error_table(
    epsilons,
    sensitivity: float,
    rng: RngStream | None = None,
    mc_samples: int = 100_000,
) -> list[ErrorRow]:
    """Side-by-side expected noise magnitudes per epsilon.

    Columns: analytic Laplace mean |noise| = sensitivity/epsilon, the
    closed-form Arete bound 2*alpha*theta + lam, and Monte Carlo estimates
    of E|noise| for Arete and Staircase.  Rows outside the Strict Arete
    domain are marked (arete_certified_domain = False), never dropped; their
    Arete columns use the same Permissive formulas.
    """
    if rng is None:
        rng = RngStream(0)
    rows = []
    for eps in epsilons:
        params = parameterize_arete(eps, sensitivity, Mode.PERMISSIVE)
        arete_abs = float(np.abs(sample_arete(params, rng, mc_samples)).mean())
        sc_params = StaircaseParams(eps, sensitivity)
        sc_abs = float(np.abs(sample_staircase(sc_params, rng, mc_samples)).mean())
        rows.append(
            ErrorRow(
                epsilon=float(eps),
                laplace_expected_abs=sensitivity / eps,
                arete_bound=arete_moments(params).expected_abs_upper,
                arete_mc=arete_abs,
                staircase_mc=sc_abs,
                arete_certified_domain=in_strict_domain(eps, sensitivity),
            )
        )
    return rows
