"""Bit-level emulation of the TTP feed-forward circuit.

Angles are Angle8 codes (multiples of pi/4). The circuit takes the partial
angle A, the algorithm angle B, the pad bit r1, the one-hot detector pair of
the first station and the round-type bit c, and drives the Pockels cell of the
second station with a one-hot 3-bit voltage code plus a post-processing flip f.
"""
from __future__ import annotations

from dataclasses import dataclass

# delta2 code -> (f, V code as "v2v1v0"); V picks the PC phase-shift
DELTA2_TO_FV: dict[int, tuple[int, str]] = {
    0: (0, "000"),
    1: (1, "100"),
    2: (1, "010"),
    3: (1, "001"),
    4: (1, "000"),
    5: (0, "100"),
    6: (0, "010"),
    7: (0, "001"),
}
FV_TO_DELTA2 = {fv: d for d, fv in DELTA2_TO_FV.items()}

# V code -> PC phase-shift as an Angle8 code
V_TO_PC_PHASE = {"000": 0, "001": 1, "010": 2, "100": 3}

# ideal phase-shift column of the lookup table: -delta2 mod 2pi
IDEAL_PHASE = {d: (-d) % 8 for d in range(8)}


class FeedForwardError(ValueError):
    """Invalid detector pattern on the first-station lines."""


@dataclass(frozen=True)
class FFInput:
    A: int
    B: int
    r1: int
    m1_plus: int
    m1_minus: int
    c: int


@dataclass(frozen=True)
class FFOutput:
    V: str
    f: int
    m1_true_plus: int
    m1_true_minus: int

    @property
    def delta2(self) -> int:
        return FV_TO_DELTA2[(self.f, self.V)]

    @property
    def pc_phase(self) -> int:
        return V_TO_PC_PHASE[self.V]

    @property
    def m1_true(self) -> int:
        return 0 if (self.m1_true_plus, self.m1_true_minus) == (1, 0) else 1


def encode_outcome(m: int) -> tuple[int, int]:
    """Logical outcome -> (m+, m-) detector lines."""
    return (1, 0) if m == 0 else (0, 1)


def decode_outcome(plus: int, minus: int) -> int:
    if (plus, minus) == (1, 0):
        return 0
    if (plus, minus) == (0, 1):
        return 1
    raise FeedForwardError(f"detector pair ({plus}, {minus}) is not one-hot")


def ff_delta2(A: int, B: int, m1_true: int, c: int) -> int:
    if c:
        return (A + B) % 8
    return (A + (B if m1_true == 0 else -B)) % 8


def encode_delta2(delta2: int) -> tuple[int, str]:
    return DELTA2_TO_FV[delta2 % 8]


def physical_angle(delta2: int) -> int:
    """Angle8 code actually analysed by the second station for ``delta2``.

    Measuring at delta + pi is measuring at delta with the bit flipped, so the
    station measures at -(PC phase) and the flip f restores the outcome.
    """
    f, v = encode_delta2(delta2)
    return (-V_TO_PC_PHASE[v]) % 8


def ff_lookup(inp: FFInput) -> FFOutput:
    for name in ("A", "B"):
        val = getattr(inp, name)
        if not 0 <= val < 8:
            raise ValueError(f"{name}={val} is not a 3-bit code")
    m1 = decode_outcome(inp.m1_plus, inp.m1_minus)
    m1_true = m1 ^ (inp.r1 & 1)
    delta2 = ff_delta2(inp.A, inp.B, m1_true, inp.c & 1)
    f, v = DELTA2_TO_FV[delta2]
    plus, minus = encode_outcome(m1_true)
    return FFOutput(V=v, f=f, m1_true_plus=plus, m1_true_minus=minus)
