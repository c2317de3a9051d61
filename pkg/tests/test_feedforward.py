import itertools
import math

import numpy as np
import pytest

from qline_vbqc import qmath
from qline_vbqc.feedforward import (
    FFInput,
    FeedForwardError,
    decode_outcome,
    encode_delta2,
    ff_lookup,
    physical_angle,
)

# delta2 (pi/4 units) -> (ideal phase-shift, PC phase-shift, f, "fv2v1v0")
TABLE = {
    0: (0, 0, 0, "0000"),
    1: (7, 3, 1, "1100"),
    2: (6, 2, 1, "1010"),
    3: (5, 1, 1, "1001"),
    4: (4, 0, 1, "1000"),
    5: (3, 3, 0, "0100"),
    6: (2, 2, 0, "0010"),
    7: (1, 1, 0, "0001"),
}
VOLTAGE = {"000": 0, "100": 3, "010": 2, "001": 1}


@pytest.mark.parametrize("delta2", range(8))
def test_table_round_trip(delta2):
    ideal, pc, f, code = TABLE[delta2]
    got_f, v = encode_delta2(delta2)
    assert (got_f, v) == (f, code[1:]) and code[0] == str(f)
    assert VOLTAGE[v] == pc
    assert (-delta2) % 8 == ideal
    assert (ideal - 4 * f) % 8 == pc


@pytest.mark.parametrize("delta2", range(8))
def test_lookup_reaches_every_row(delta2):
    # test round: delta2 = A + B
    out = ff_lookup(FFInput(A=(delta2 - 2) % 8, B=2, r1=0, m1_plus=1, m1_minus=0, c=1))
    assert out.delta2 == delta2
    assert f"{out.f}{out.V}" == TABLE[delta2][3]
    assert out.pc_phase == TABLE[delta2][1]


@pytest.mark.parametrize("delta", range(8))
def test_physical_basis_with_flip_equals_direct_basis(delta):
    # measuring at -(PC phase) and flipping by f gives the same statistics as measuring at delta2
    f, _ = encode_delta2(delta)
    rho = qmath.projector(np.array([0.6, 0.8 * np.exp(0.4j)]))
    direct = np.real(qmath.equatorial_ket(delta * math.pi / 4).conj() @ rho @ qmath.equatorial_ket(delta * math.pi / 4))
    e = qmath.equatorial_ket(physical_angle(delta) * math.pi / 4)
    phys = np.real(e.conj() @ rho @ e)
    assert (phys if f == 0 else 1 - phys) == pytest.approx(direct, abs=1e-12)


def test_lookup_is_total_and_matches_formula():
    for A, B, r1, m1, c in itertools.product(range(8), range(8), (0, 1), (0, 1), (0, 1)):
        plus, minus = (1, 0) if m1 == 0 else (0, 1)
        out = ff_lookup(FFInput(A, B, r1, plus, minus, c))
        m1_true = m1 ^ r1
        want = (A + B) % 8 if c else (A + (-1) ** m1_true * B) % 8
        assert out.delta2 == want
        assert out.m1_true == m1_true
        assert (out.m1_true_plus, out.m1_true_minus) == ((1, 0) if m1_true == 0 else (0, 1))
        assert out.V in VOLTAGE


@pytest.mark.parametrize("pair", [(0, 0), (1, 1)])
def test_invalid_detector_pattern(pair):
    with pytest.raises(FeedForwardError):
        ff_lookup(FFInput(0, 2, 0, *pair, 0))
    with pytest.raises(FeedForwardError):
        decode_outcome(*pair)


def test_table_spot_rows():
    assert ff_lookup(FFInput(0, 2, 0, 1, 0, 1)).pc_phase == 2  # delta2 = pi/2
    assert ff_lookup(FFInput(0, 2, 0, 1, 0, 1)).f == 1
    assert ff_lookup(FFInput(6, 2, 0, 1, 0, 1)).pc_phase == 0  # delta2 = 0
    assert ff_lookup(FFInput(6, 2, 0, 1, 0, 1)).f == 0
    assert ff_lookup(FFInput(5, 2, 0, 1, 0, 1)).pc_phase == 1  # delta2 = 7pi/4
    assert ff_lookup(FFInput(5, 2, 0, 1, 0, 1)).f == 0
