"""Parameter types, exact samplers, and analytic moments.

Covers the four noise laws the package works with: Gamma, Laplace, the
Gamma-difference ("Gamma minus Gamma") implied by paired Gamma draws, the
Arete distribution built from them, and the Staircase baseline.

The Gamma sampler is exact for arbitrarily small shape: for shape < 1 it
uses the boost identity X = G * U**(1/shape) with G ~ Gamma(shape+1, 1),
evaluated entirely in log space.  Values whose logarithm falls below the
smallest representable double are flushed to exact 0; at 64-bit precision
such draws are indistinguishable from 0 anyway, so the flush is
statistically invisible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .rng import LaneRng, RngStream, bits_to_unit, position_values

__all__ = [
    "GammaParams",
    "LaplaceParams",
    "AreteParams",
    "StaircaseParams",
    "AreteMoments",
    "sample_gamma",
    "sample_laplace",
    "sample_arete",
    "sample_staircase",
    "arete_moments",
    "staircase_normalizer",
    "staircase_expected_abs",
]


def _require_positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0.0):
        raise ValueError(f"{name} must be a positive finite real, got {value!r}")


@dataclass(frozen=True)
class GammaParams:
    """Gamma(shape, scale); density e**(-t/scale) * t**(shape-1) / (Gamma(shape) * scale**shape)."""

    shape: float
    scale: float

    def __post_init__(self):
        _require_positive("shape", self.shape)
        _require_positive("scale", self.scale)


@dataclass(frozen=True)
class LaplaceParams:
    """Laplace(0, scale); density e**(-|t|/scale) / (2*scale)."""

    scale: float

    def __post_init__(self):
        _require_positive("scale", self.scale)


@dataclass(frozen=True)
class AreteParams:
    """Arete(alpha, theta, lam): X1 - X2 + Y with Xi ~ Gamma(alpha, theta), Y ~ Laplace(lam).

    Only 0 < alpha <= 1 is meaningful for the mechanism (the density spike
    at 0 that makes the distribution useful exists for shape below 1), so
    larger alpha is rejected.
    """

    alpha: float
    theta: float
    lam: float

    def __post_init__(self):
        _require_positive("alpha", self.alpha)
        _require_positive("theta", self.theta)
        _require_positive("lam", self.lam)
        if self.alpha > 1.0:
            raise ValueError(f"alpha must satisfy alpha <= 1, got {self.alpha!r}")


@dataclass(frozen=True)
class StaircaseParams:
    """Staircase noise with privacy parameter epsilon and period delta_sens.

    gamma in [0, 1] splits each period into a high step of width
    gamma*delta_sens and a low step at relative height e**(-epsilon).  The
    default gamma = e**(-epsilon/2) targets small expected magnitude; it is
    a documented choice, not a claimed optimum (the optimal gamma differs
    by objective).
    """

    epsilon: float
    delta_sens: float
    gamma: float = field(default=-1.0)

    def __post_init__(self):
        _require_positive("epsilon", self.epsilon)
        _require_positive("delta_sens", self.delta_sens)
        if self.gamma == -1.0:
            object.__setattr__(self, "gamma", math.exp(-self.epsilon / 2.0))
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma!r}")


class AreteMoments(NamedTuple):
    expected_abs_upper: float
    variance: float


def arete_moments(params: AreteParams) -> AreteMoments:
    """Closed-form moments: E|Z| <= 2*alpha*theta + lam, Var[Z] = 2*alpha*theta**2 + 2*lam**2."""
    a, t, lam = params.alpha, params.theta, params.lam
    return AreteMoments(2.0 * a * t + lam, 2.0 * a * t * t + 2.0 * lam * lam)


# ---------------------------------------------------------------------------
# Gamma sampling
# ---------------------------------------------------------------------------

def _standard_gamma_lanes(shape: float, lanes: LaneRng) -> np.ndarray:
    """Marsaglia-Tsang sampler for Gamma(shape, 1), shape >= 1, one value per lane.

    Each rejection round consumes exactly three uniforms per still-active
    lane (two for the Box-Muller normal, one for the accept test), so a
    lane's output depends only on its own key.
    """
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(len(lanes), dtype=np.float64)
    todo = np.arange(len(lanes))
    while todo.size:
        u1 = lanes.next_uniform(todo)
        u2 = lanes.next_uniform(todo)
        u3 = lanes.next_uniform(todo)
        x = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)
        v = (1.0 + c * x) ** 3
        accept = np.zeros(todo.size, dtype=bool)
        ok = v > 0.0
        if ok.any():
            vv = v[ok]
            xx = x[ok]
            uu = u3[ok]
            squeeze = uu < 1.0 - 0.0331 * xx**4
            full = np.log(uu) < 0.5 * xx * xx + d * (1.0 - vv + np.log(vv))
            accept[ok] = squeeze | full
        done = todo[accept]
        out[done] = d * v[accept]
        todo = todo[~accept]
    return out


def _gamma_lanes(shape: float, scale: float, lanes: LaneRng) -> np.ndarray:
    """Gamma(shape, scale) per lane, exact down to shapes of order 1e-300."""
    if shape >= 1.0:
        return scale * _standard_gamma_lanes(shape, lanes)
    g = _standard_gamma_lanes(shape + 1.0, lanes)
    u = lanes.next_uniform()
    log_x = np.log(g) + np.log(u) / shape + math.log(scale)
    # exp underflow flushes to exact 0 (documented policy)
    return np.exp(log_x)


def sample_gamma(params: GammaParams, rng: RngStream, size: int | None = None):
    """Draw from Gamma(shape, scale).  Returns a float, or an array if size is given."""
    n = 1 if size is None else int(size)
    values = _gamma_lanes(params.shape, params.scale, LaneRng(rng.take_lane_keys(n)))
    return float(values[0]) if size is None else values


# ---------------------------------------------------------------------------
# Laplace sampling
# ---------------------------------------------------------------------------

def _laplace_from_unit(u: np.ndarray, scale: float) -> np.ndarray:
    """Inverse-CDF transform of uniforms in (0, 1) to Laplace(0, scale)."""
    t = u - 0.5
    return -scale * np.sign(t) * np.log1p(-2.0 * np.abs(t))


def sample_laplace(params: LaplaceParams, rng: RngStream, size: int | None = None):
    """Draw from Laplace(0, scale) by inversion (one uniform per value)."""
    n = 1 if size is None else int(size)
    values = _laplace_from_unit(rng.uniform(n), params.scale)
    return float(values[0]) if size is None else values


# ---------------------------------------------------------------------------
# Arete sampling
# ---------------------------------------------------------------------------

def sample_arete(params: AreteParams, rng: RngStream, size: int | None = None):
    """Draw Z = X1 - X2 + Y with X1, X2 ~ Gamma(alpha, theta) and Y ~ Laplace(lam)."""
    n = 1 if size is None else int(size)
    gp = GammaParams(params.alpha, params.theta)
    lp = LaplaceParams(params.lam)
    x1 = sample_gamma(gp, rng, n)
    x2 = sample_gamma(gp, rng, n)
    y = sample_laplace(lp, rng, n)
    values = x1 - x2 + y
    return float(values[0]) if size is None else values


def _arete_from_stream_keys(params: AreteParams, stream_keys: np.ndarray) -> np.ndarray:
    """One Arete draw per stream key, laid out exactly like sample_arete on that stream.

    sample_arete consumes stream positions 0, 1 (lane keys of the two Gamma
    draws) and 2 (the Laplace uniform); reproducing that layout lets the
    simulator batch across per-trial streams and still match the scalar path
    bit for bit.
    """
    stream_keys = np.asarray(stream_keys, dtype=np.uint64).reshape(-1)
    x1 = _gamma_lanes(params.alpha, params.theta, LaneRng(position_values(stream_keys, 0)))
    x2 = _gamma_lanes(params.alpha, params.theta, LaneRng(position_values(stream_keys, 1)))
    y = _laplace_from_unit(bits_to_unit(position_values(stream_keys, 2)), params.lam)
    return x1 - x2 + y


def _laplace_from_stream_keys(params: LaplaceParams, stream_keys: np.ndarray) -> np.ndarray:
    """One Laplace draw per stream key (stream position 0), matching sample_laplace."""
    stream_keys = np.asarray(stream_keys, dtype=np.uint64).reshape(-1)
    return _laplace_from_unit(bits_to_unit(position_values(stream_keys, 0)), params.scale)


# ---------------------------------------------------------------------------
# Staircase sampling
# ---------------------------------------------------------------------------

def staircase_normalizer(params: StaircaseParams) -> float:
    """Height a(gamma) of the central step: (1-q) / (2*D*(gamma + q*(1-gamma))), q = e**-eps."""
    q = math.exp(-params.epsilon)
    return (1.0 - q) / (2.0 * params.delta_sens * (params.gamma + q * (1.0 - params.gamma)))


def sample_staircase(params: StaircaseParams, rng: RngStream, size: int | None = None):
    """Draw from the Staircase distribution.

    Mixture decomposition, exact by construction: uniform sign; period index
    k geometric with ratio e**-eps (inversion); within the period the high
    sub-step [kD, kD + gamma*D) versus low sub-step [kD + gamma*D, (k+1)D)
    with odds gamma : e**-eps * (1 - gamma); uniform position inside the
    chosen sub-step.  Four uniforms per draw, constant time.
    """
    n = 1 if size is None else int(size)
    eps, delta, gamma = params.epsilon, params.delta_sens, params.gamma
    q = math.exp(-eps)

    u_sign = rng.uniform(n)
    u_seg = rng.uniform(n)
    u_part = rng.uniform(n)
    u_pos = rng.uniform(n)

    sign = np.where(u_sign < 0.5, -1.0, 1.0)
    k = np.floor(-np.log(u_seg) / eps)
    p_high = gamma / (gamma + q * (1.0 - gamma))
    high = u_part < p_high
    offset = np.where(
        high,
        u_pos * gamma * delta,
        gamma * delta + u_pos * (1.0 - gamma) * delta,
    )
    values = sign * (k * delta + offset)
    return float(values[0]) if size is None else values


def staircase_expected_abs(params: StaircaseParams) -> float:
    """Analytic E|X| for the Staircase distribution (geometric series in closed form)."""
    q = math.exp(-params.epsilon)
    delta, gamma = params.delta_sens, params.gamma
    a = staircase_normalizer(params)
    s0 = 1.0 / (1.0 - q)
    s1 = q / (1.0 - q) ** 2
    # sum over periods k of q**k * (high-step first moment + low-step first moment)
    high = gamma * s1 + 0.5 * gamma * gamma * s0
    low = 0.5 * q * (1.0 - gamma) * (2.0 * s1 + (1.0 + gamma) * s0)
    return 2.0 * a * delta * delta * (high + low)
