"""Desk-scale simulator for distributed private summation.

n clients each hold a bounded value; every participant adds a noise share;
an honest-but-curious aggregator learns only the total.  The cryptographic
aggregation layer is modelled as an ideal exact sum — it contributes
nothing to the noise analysis — so the simulator's entire subject is the
noise law: with infinitely divisible shares the distributed total noise is
exactly the central-model noise, which is the property the comparison
modes exercise.

Sensitivity is derived from the value range (a sum query over values in
[lo, hi] changes by at most hi - lo when one record is replaced) rather
than accepted as free input, so runs cannot be miscalibrated.  Values
outside the range are errors, never clipped: silent clipping changes the
query and voids the sensitivity derivation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .distributions import (
    AreteParams,
    LaplaceParams,
    _arete_from_stream_keys,
    _laplace_from_stream_keys,
    sample_arete,
    sample_laplace,
)
from .divisibility import NoiseShareSpec, make_share, share_sum_samples
from .mechanisms import Mode, in_strict_domain, parameterize_arete
from .rng import RngStream

__all__ = [
    "InputError",
    "SimMechanism",
    "SimConfig",
    "SimReport",
    "run_round",
    "run_trials",
    "total_noise_samples",
    "compare_mechanisms",
]


class InputError(ValueError):
    """A client value violated the declared range; carries the client index."""

    def __init__(self, index: int, value: float, lo: float, hi: float):
        self.index = index
        super().__init__(f"client {index} value {value!r} outside declared range [{lo}, {hi}]")


class SimMechanism(enum.Enum):
    DISTRIBUTED_ARETE = "distributed-arete"
    DISTRIBUTED_LAPLACE = "distributed-laplace"
    CENTRAL_ARETE = "central-arete"
    CENTRAL_LAPLACE = "central-laplace"
    NO_NOISE = "no-noise"


_DISTRIBUTED = {SimMechanism.DISTRIBUTED_ARETE, SimMechanism.DISTRIBUTED_LAPLACE}
_ARETE = {SimMechanism.DISTRIBUTED_ARETE, SimMechanism.CENTRAL_ARETE}


@dataclass(frozen=True)
class SimConfig:
    """One simulation setting.

    participation m defaults to n; m > n models over-participation (still
    private, strictly noisier), m < n is allowed but flagged as privacy
    degraded since no guarantee is claimed for partial participation.
    permissive=True allows Arete parameterization below the certified
    epsilon domain, echoed as an 'unverified' flag in the report.
    """

    n: int
    value_range: tuple[float, float]
    mechanism: SimMechanism
    epsilon: float
    trials: int
    seed: int
    participation: int | None = None
    permissive: bool = False

    def __post_init__(self):
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        lo, hi = self.value_range
        if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
            raise ValueError(f"value_range must satisfy hi > lo, got {self.value_range!r}")
        if not (isinstance(self.trials, int) and self.trials >= 1):
            raise ValueError(f"trials must be an integer >= 1, got {self.trials!r}")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if self.participation is not None and self.participation < 1:
            raise ValueError(f"participation must be >= 1, got {self.participation!r}")

    @property
    def sensitivity(self) -> float:
        """Record-replacement sensitivity of the sum query over the declared range."""
        lo, hi = self.value_range
        return hi - lo

    @property
    def m(self) -> int:
        return self.n if self.participation is None else self.participation


@dataclass(frozen=True)
class SimReport:
    true_sum: float
    noisy_sums: np.ndarray
    mean_abs_error: float
    rmse: float
    metadata: dict[str, Any] = field(repr=False)


def _noise_params(config: SimConfig) -> AreteParams | LaplaceParams | None:
    if config.mechanism is SimMechanism.NO_NOISE:
        return None
    if config.mechanism in _ARETE:
        mode = Mode.PERMISSIVE if config.permissive else Mode.STRICT
        return parameterize_arete(config.epsilon, config.sensitivity, mode)
    return LaplaceParams(config.sensitivity / config.epsilon)


def _validate_values(config: SimConfig, values) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (config.n,):
        raise ValueError(f"expected {config.n} client values, got shape {values.shape}")
    lo, hi = config.value_range
    bad = np.nonzero((values < lo) | (values > hi) | ~np.isfinite(values))[0]
    if bad.size:
        i = int(bad[0])
        raise InputError(i, float(values[i]), lo, hi)
    return values


def run_round(config: SimConfig, values, trial_index: int) -> float:
    """One aggregation round: exact sum of values plus the round's total noise.

    Distributed modes add participation-many shares built for divisor n,
    each from the round's per-participant substream; central modes add one
    central draw from the round stream.  Bit-identical to the corresponding
    entry of run_trials.
    """
    values = _validate_values(config, values)
    params = _noise_params(config)
    total = float(np.sum(values))
    if params is None:
        return total
    round_rng = RngStream(config.seed).substream(trial_index)
    if config.mechanism in _DISTRIBUTED:
        spec = NoiseShareSpec(config.n, params)
        noise = sum(make_share(spec, i, round_rng).value for i in range(config.m))
    elif isinstance(params, AreteParams):
        noise = sample_arete(params, round_rng)
    else:
        noise = sample_laplace(params, round_rng)
    return total + noise


def total_noise_samples(config: SimConfig) -> np.ndarray:
    """The per-trial total noise vector (what noisy_sum - true_sum will be)."""
    params = _noise_params(config)
    if params is None:
        return np.zeros(config.trials)
    root = RngStream(config.seed)
    if config.mechanism in _DISTRIBUTED:
        spec = NoiseShareSpec(config.n, params)
        return share_sum_samples(spec, root, config.trials, participants=config.m)
    trial_keys = root.substream_keys(np.arange(config.trials, dtype=np.uint64))
    if isinstance(params, AreteParams):
        return _arete_from_stream_keys(params, trial_keys)
    return _laplace_from_stream_keys(params, trial_keys)


def run_trials(config: SimConfig, values) -> SimReport:
    """Run config.trials independent rounds and aggregate the error statistics."""
    values = _validate_values(config, values)
    true_sum = float(np.sum(values))
    noise = total_noise_samples(config)
    noisy = true_sum + noise
    metadata = {
        "mechanism": config.mechanism.value,
        "epsilon": config.epsilon,
        "sensitivity": config.sensitivity,
        "n": config.n,
        "participation": config.m,
        "trials": config.trials,
        "seed": config.seed,
        "params": _params_dict(_noise_params(config)),
        "privacy_degraded": config.m < config.n,
        "certificate": _certificate_label(config),
    }
    return SimReport(
        true_sum=true_sum,
        noisy_sums=noisy,
        mean_abs_error=float(np.abs(noise).mean()),
        rmse=float(np.sqrt(np.mean(noise * noise))),
        metadata=metadata,
    )


def _params_dict(params) -> dict[str, float] | None:
    if params is None:
        return None
    if isinstance(params, AreteParams):
        return {"alpha": params.alpha, "theta": params.theta, "lam": params.lam}
    return {"scale": params.scale}


def _certificate_label(config: SimConfig) -> str:
    if config.mechanism is SimMechanism.NO_NOISE:
        return "none (no privacy)"
    if config.mechanism in _ARETE:
        if in_strict_domain(config.epsilon, config.sensitivity):
            return "analytic (certified parameter domain)"
        return "unverified (permissive parameters; run the privacy scan)"
    return "analytic (Laplace mechanism)"


def compare_mechanisms(configs, values) -> list[dict[str, Any]]:
    """Run several mechanisms on the same inputs, one summary row each.

    All configs must share n, value_range, trials, and seed so the rows are
    comparable.
    """
    configs = list(configs)
    if not configs:
        raise ValueError("need at least one config")
    base = configs[0]
    for c in configs[1:]:
        shared = (c.n, c.value_range, c.trials, c.seed)
        expected = (base.n, base.value_range, base.trials, base.seed)
        if shared != expected:
            raise ValueError(
                f"configs must share n, value_range, trials, seed; got {shared} vs {expected}"
            )
    rows = []
    for c in configs:
        report = run_trials(c, values)
        rows.append(
            {
                "mechanism": c.mechanism.value,
                "epsilon": c.epsilon,
                "mean_abs_error": report.mean_abs_error,
                "rmse": report.rmse,
                "params": report.metadata["params"],
                "certificate": report.metadata["certificate"],
                "privacy_degraded": report.metadata["privacy_degraded"],
            }
        )
    return rows
