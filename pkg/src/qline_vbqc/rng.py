"""Counter-based uniforms keyed by (seed, round, slot).

Every random quantity in a round reads a fixed slot, so a round's draws do not
depend on which other rounds ran, in what order, or on how many threads. The
mixer is the SplitMix64 finalizer applied to a combined key; it is evaluated
vectorized over round indices.
"""
from __future__ import annotations

import numpy as np

_M64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_SLOT_MUL = np.uint64(0xD1B54A32D192ED03)

# fixed slot layout of one protocol round
SLOT_ROUND_TYPE = 0
SLOT_THETA = (1, 2, 3, 4)  # A q1, A q2, B q1, B q2
SLOT_B = (5, 6, 7, 8)
SLOT_R = (9, 10, 11, 12)
SLOT_LC = (13, 14, 15, 16)
SLOT_MEAS_ERR = (17, 18)
SLOT_PC = 19
SLOT_M1 = 20
SLOT_M2 = 21
SLOT_FLIP = (22, 23)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, rounds, slot: int) -> np.ndarray:
    """Uniform floats in [0, 1) for each round index in ``rounds`` at ``slot``."""
    rounds = np.asarray(rounds, dtype=np.uint64)
    with np.errstate(over="ignore"):
        key = _mix(np.uint64(seed & _M64) + _GOLDEN)
        z = key + (rounds + np.uint64(1)) * _GOLDEN
        z = _mix(z) + np.uint64(slot + 1) * _SLOT_MUL
        z = _mix(z)
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


class RoundRNG:
    """Random source for one round; ``uniform(slot)`` is a pure function."""

    def __init__(self, seed: int, round_index: int):
        self.seed = int(seed)
        self.round_index = int(round_index)

    def uniform(self, slot: int) -> float:
        return float(uniforms(self.seed, [self.round_index], slot)[0])

    def at(self, slot: int) -> "_Fixed":
        return _Fixed(self.uniform(slot))


class _Fixed:
    def __init__(self, u: float):
        self.u = u

    def random(self) -> float:
        return self.u
