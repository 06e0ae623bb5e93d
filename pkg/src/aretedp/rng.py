"""Deterministic counter-based random streams.

A stream is a (key, position) pair over 64-bit integers.  The value at
position ``p`` is ``mix64(key + GOLDEN * p)`` where ``mix64`` is the
SplitMix64 finalizer, so any draw is a pure function of (key, position) and
never depends on what other lanes or processes have drawn.  Child streams
are derived by hashing an index into the parent key, which makes the stream
for e.g. (seed, trial t, client i) addressable in any order: generating
client-major batches and trial-major single rounds yields bit-identical
values.

Rejection samplers built on top keep one lane per output value, each lane
advancing its own position counter, so vectorised sampling stays
reproducible regardless of batch size or composition.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_DERIVE_SALT = np.uint64(0xD1B54A32D192ED03)
_MIX_M1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = 0xFFFFFFFFFFFFFFFF
# (bits >> 11) spans [0, 2**53); +0.5 then scaling keeps uniforms in open (0, 1)
# so downstream log() calls never see 0.
_INV_2_53 = np.float64(2.0**-53)


def mix64(z):
    """SplitMix64 finalizer, vectorised over uint64 arrays."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z ^ (z >> np.uint64(30))
        z = z * _MIX_M1
        z = z ^ (z >> np.uint64(27))
        z = z * _MIX_M2
        z = z ^ (z >> np.uint64(31))
    return z


def derive_key(key, index):
    """Child stream key for (parent key, substream index).

    Vectorised over either argument; collision-free in practice (the index
    is avalanche-mixed before being folded into the parent key).
    """
    key = np.asarray(key, dtype=np.uint64)
    index = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(key ^ mix64(index * _GOLDEN + _DERIVE_SALT))


def position_values(key, positions):
    """Raw 64-bit stream values at the given positions (vectorised)."""
    key = np.asarray(key, dtype=np.uint64)
    positions = np.asarray(positions, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(key + _GOLDEN * (positions + np.uint64(1)))


def bits_to_unit(bits):
    """Map raw 64-bit values to float64 uniforms in the open interval (0, 1)."""
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53


class RngStream:
    """A seedable, splittable stream of uniform draws.

    Identical seed and call sequence reproduce identical outputs bit for
    bit.  ``substream(i)`` derives an independent child stream keyed by
    ``i`` without consuming any state from the parent, so the same child
    can be re-derived at will (the property the share generator and the
    simulator rely on).
    """

    __slots__ = ("seed", "_key", "_pos")

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._key = mix64(np.uint64(self.seed))[()]
        self._pos = 0

    @classmethod
    def _from_key(cls, key: np.uint64, seed: int) -> "RngStream":
        stream = cls.__new__(cls)
        stream.seed = seed
        stream._key = np.uint64(key)
        stream._pos = 0
        return stream

    @property
    def key(self) -> np.uint64:
        return self._key

    @property
    def position(self) -> int:
        return self._pos

    def substream(self, index: int) -> "RngStream":
        if index < 0:
            raise ValueError(f"substream index must be nonnegative, got {index}")
        return RngStream._from_key(derive_key(self._key, index)[()], self.seed)

    def substream_keys(self, indices) -> np.ndarray:
        """Vectorised child keys; equals [self.substream(i).key for i in indices]."""
        return derive_key(self._key, indices)

    def take_lane_keys(self, count: int) -> np.ndarray:
        """Consume `count` positions and return one fresh lane key per position.

        Each lane key seeds an independent sub-sequence, which is how the
        samplers obtain a private stream per output value (rejection loops
        then advance only their own lane).
        """
        keys = position_values(self._key, self._pos + np.arange(count, dtype=np.uint64))
        self._pos += count
        return keys

    def uniform(self, size: int | None = None):
        """Uniform draws in the open interval (0, 1)."""
        n = 1 if size is None else int(size)
        bits = position_values(self._key, self._pos + np.arange(n, dtype=np.uint64))
        self._pos += n
        u = bits_to_unit(bits)
        return float(u[0]) if size is None else u

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, key={int(self._key):#018x}, pos={self._pos})"


class LaneRng:
    """Parallel per-lane streams for vectorised rejection sampling.

    Each lane owns a key and a position counter.  ``next_uniform(idx)``
    draws one uniform for the selected lanes and advances only their
    counters, so a lane's sequence is independent of which other lanes are
    still active in a rejection loop.
    """

    __slots__ = ("keys", "pos")

    def __init__(self, keys: np.ndarray):
        self.keys = np.asarray(keys, dtype=np.uint64).reshape(-1)
        self.pos = np.zeros(self.keys.shape, dtype=np.uint64)

    def __len__(self) -> int:
        return self.keys.size

    def next_uniform(self, idx=None) -> np.ndarray:
        if idx is None:
            keys, pos = self.keys, self.pos
            bits = position_values(keys, pos)
            with np.errstate(over="ignore"):
                self.pos = self.pos + np.uint64(1)
        else:
            bits = position_values(self.keys[idx], self.pos[idx])
            with np.errstate(over="ignore"):
                self.pos[idx] = self.pos[idx] + np.uint64(1)
        return bits_to_unit(bits)
