"""Infinitely divisible noise shares.

The Arete and Laplace laws split exactly across n participants:

* Arete(alpha, theta, lam) is the law of the sum over i of
  X1_i - X2_i + Y1_i - Y2_i with X*_i ~ Gamma(alpha/n, theta) and
  Y*_i ~ Gamma(1/n, lam);
* Laplace(lam) is the law of the sum over i of X_i - Y_i with
  X_i, Y_i ~ Gamma(1/n, lam).

Share i is drawn from substream(i) of the caller's stream, so any subset
of shares is reproducible independently — dropout experiments re-derive
exactly the shares of the participants that remain.  For n*epsilon large
the component shapes underflow the useful Gamma range; the log-domain
sampler then returns exact zeros for draws whose value would be below the
smallest double, which is the correct rounding of such draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import AreteParams, GammaParams, LaplaceParams, _gamma_lanes, sample_gamma
from .rng import LaneRng, RngStream, derive_key, position_values

__all__ = [
    "NoiseShareSpec",
    "NoiseShare",
    "arete_share",
    "laplace_share",
    "make_share",
    "sum_shares",
    "share_matrix",
    "share_sum_samples",
]


@dataclass(frozen=True)
class NoiseShareSpec:
    """Recipe for one participant's share of noise split across n participants."""

    n: int
    target: AreteParams | LaplaceParams

    def __post_init__(self):
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError(f"participant count n must be an integer >= 1, got {self.n!r}")
        if not isinstance(self.target, (AreteParams, LaplaceParams)):
            raise TypeError(f"target must be AreteParams or LaplaceParams, got {type(self.target)!r}")


@dataclass(frozen=True)
class NoiseShare:
    value: float
    participant_index: int

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"share value must be finite, got {self.value!r}")


def _check_index(spec: NoiseShareSpec, index: int) -> None:
    if index < 0:
        raise ValueError(f"participant index must be nonnegative, got {index}")


def arete_share(spec: NoiseShareSpec, index: int, rng: RngStream) -> NoiseShare:
    """Participant `index`'s share of Arete noise: X1 - X2 + Y1 - Y2.

    X1, X2 ~ Gamma(alpha/n, theta) and Y1, Y2 ~ Gamma(1/n, lam), drawn from
    rng.substream(index).
    """
    if not isinstance(spec.target, AreteParams):
        raise TypeError(f"spec target is {type(spec.target).__name__}, expected AreteParams")
    _check_index(spec, index)
    t = spec.target
    stream = rng.substream(index)
    gp = GammaParams(t.alpha / spec.n, t.theta)
    lp = GammaParams(1.0 / spec.n, t.lam)
    x1 = sample_gamma(gp, stream)
    x2 = sample_gamma(gp, stream)
    y1 = sample_gamma(lp, stream)
    y2 = sample_gamma(lp, stream)
    return NoiseShare(x1 - x2 + y1 - y2, index)


def laplace_share(spec: NoiseShareSpec, index: int, rng: RngStream) -> NoiseShare:
    """Participant `index`'s share of Laplace noise: X - Y with X, Y ~ Gamma(1/n, lam)."""
    if not isinstance(spec.target, LaplaceParams):
        raise TypeError(f"spec target is {type(spec.target).__name__}, expected LaplaceParams")
    _check_index(spec, index)
    stream = rng.substream(index)
    lp = GammaParams(1.0 / spec.n, spec.target.scale)
    x = sample_gamma(lp, stream)
    y = sample_gamma(lp, stream)
    return NoiseShare(x - y, index)


def make_share(spec: NoiseShareSpec, index: int, rng: RngStream) -> NoiseShare:
    """Dispatch on the spec's target law."""
    if isinstance(spec.target, AreteParams):
        return arete_share(spec, index, rng)
    return laplace_share(spec, index, rng)


def sum_shares(shares) -> float:
    """Arithmetic sum of share values (the aggregate the analyst sees)."""
    shares = list(shares)
    if not shares:
        raise ValueError("cannot sum an empty list of shares")
    return float(sum(s.value for s in shares))


# ---------------------------------------------------------------------------
# Vectorised batch path
# ---------------------------------------------------------------------------

def _share_values_for_keys(spec: NoiseShareSpec, share_keys: np.ndarray) -> np.ndarray:
    """One share value per share-stream key, matching the scalar functions.

    The scalar share consumes positions 0..3 (Arete) or 0..1 (Laplace) of
    its stream as lane keys for the component Gamma draws; this reproduces
    that layout for a flat array of stream keys, so batch and scalar
    generation are bit-identical.
    """
    share_keys = np.asarray(share_keys, dtype=np.uint64).reshape(-1)
    t = spec.target
    if isinstance(t, AreteParams):
        x1 = _gamma_lanes(t.alpha / spec.n, t.theta, LaneRng(position_values(share_keys, 0)))
        x2 = _gamma_lanes(t.alpha / spec.n, t.theta, LaneRng(position_values(share_keys, 1)))
        y1 = _gamma_lanes(1.0 / spec.n, t.lam, LaneRng(position_values(share_keys, 2)))
        y2 = _gamma_lanes(1.0 / spec.n, t.lam, LaneRng(position_values(share_keys, 3)))
        return x1 - x2 + y1 - y2
    x = _gamma_lanes(1.0 / spec.n, t.scale, LaneRng(position_values(share_keys, 0)))
    y = _gamma_lanes(1.0 / spec.n, t.scale, LaneRng(position_values(share_keys, 1)))
    return x - y


def share_matrix(spec: NoiseShareSpec, participants, round_keys) -> np.ndarray:
    """Share values for every (round, participant) pair, shape (rounds, participants).

    round_keys are the stream keys of the per-round base streams; the share
    for participant i in a round equals the scalar share drawn from that
    round's stream (substream i), whichever path generates it.
    """
    participants = np.asarray(participants, dtype=np.uint64)
    round_keys = np.asarray(round_keys, dtype=np.uint64).reshape(-1)
    share_keys = derive_key(round_keys[:, None], participants[None, :])
    values = _share_values_for_keys(spec, share_keys.ravel())
    return values.reshape(round_keys.size, participants.size)


def share_sum_samples(
    spec: NoiseShareSpec,
    rng: RngStream,
    trials: int,
    participants: int | None = None,
    chunk_lanes: int = 400_000,
) -> np.ndarray:
    """Per-trial sums of the first `participants` shares (default: all n).

    Trial t uses base stream rng.substream(t); memory is bounded by
    processing trials in chunks.  This is the distributional object the
    divisibility lemmas speak about: for participants = n the sums are
    exactly distributed as the target law.
    """
    m = spec.n if participants is None else int(participants)
    if m < 1:
        raise ValueError(f"participants must be >= 1, got {m}")
    idx = np.arange(m, dtype=np.uint64)
    out = np.empty(trials, dtype=np.float64)
    block = max(1, chunk_lanes // m)
    for start in range(0, trials, block):
        stop = min(start + block, trials)
        trial_keys = rng.substream_keys(np.arange(start, stop, dtype=np.uint64))
        out[start:stop] = share_matrix(spec, idx, trial_keys).sum(axis=1)
    return out
