import csv
import json
import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qline_vbqc import qmath
from qline_vbqc.blindness import (
    averaged_second_qubit,
    averaged_two_qubit,
    blindness_report,
    group_states,
    holevo_groups,
    holevo_protocol_ensemble,
    write_matrices_csv,
)
from qline_vbqc.devices import NoiseParams, noisy_source_state

from conftest import densities

LAB = noisy_source_state(NoiseParams.lab_default())


def brute_force_two_qubit(source):
    # independent oracle: explicit diagonal phase matrices
    acc = np.zeros((4, 4), dtype=complex)
    for a, b in product(range(8), range(8)):
        d = np.diag(np.exp(1j * math.pi / 4 * np.array([0, b, a, a + b])))
        acc += d @ source @ d.conj().T
    return acc / 64


def test_ideal_averages_are_maximally_mixed(graph_rho):
    np.testing.assert_allclose(averaged_two_qubit(graph_rho), qmath.I4 / 4, atol=1e-12)
    np.testing.assert_allclose(averaged_second_qubit(graph_rho, 5), qmath.I2 / 2, atol=1e-12)
    assert qmath.fidelity(averaged_two_qubit(graph_rho), qmath.I4 / 4) >= 1 - 1e-12
    assert holevo_protocol_ensemble(graph_rho) <= 1e-10


@pytest.mark.parametrize("delta1", range(8))
def test_ideal_single_qubit_any_angle(graph_rho, delta1):
    np.testing.assert_allclose(averaged_second_qubit(graph_rho, delta1), qmath.I2 / 2, atol=1e-12)
    for m in (0, 1):
        np.testing.assert_allclose(averaged_second_qubit(graph_rho, delta1, conditioned=m), qmath.I2 / 2, atol=1e-12)


def test_noisy_source_stays_blind():
    rep = blindness_report(LAB)
    assert rep.F_1q >= 0.98
    assert rep.F_2q >= 0.98
    assert 0 <= rep.chi <= 0.02


def test_product_source_leaks_second_qubit():
    # the pads act on qubit 1 only, so blindness of qubit 2 needs entanglement
    zero = qmath.projector(qmath.ket("00"))
    np.testing.assert_allclose(averaged_second_qubit(zero, 5), qmath.projector(qmath.ket("0")), atol=1e-12)


def test_diagonal_source_unchanged():
    rho = np.diag([0.1, 0.2, 0.3, 0.4]).astype(complex)
    np.testing.assert_allclose(averaged_two_qubit(rho), rho, atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(densities())
def test_two_qubit_average_matches_brute_force(rho):
    np.testing.assert_allclose(averaged_two_qubit(rho), brute_force_two_qubit(rho), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(densities())
def test_average_idempotent(rho):
    once = averaged_two_qubit(rho)
    np.testing.assert_allclose(averaged_two_qubit(once), once, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(densities(), densities(), st.floats(0, 1))
def test_average_linear(r1, r2, a):
    mix = averaged_two_qubit(a * r1 + (1 - a) * r2)
    np.testing.assert_allclose(mix, a * averaged_two_qubit(r1) + (1 - a) * averaged_two_qubit(r2), atol=1e-12)


def test_groups_partition_angle_pairs():
    groups = holevo_groups()
    assert len(groups) == 16
    members = [p for g in groups.values() for p in g]
    assert sorted(members) == sorted(product(range(8), range(8)))
    for (k1, k2), g in groups.items():
        assert 0 <= k1 < 4 and 0 <= k2 < 4
        assert sorted(g) == sorted({(k1 + 4 * i, k2 + 4 * j) for i in (0, 1) for j in (0, 1)})


def test_ideal_group_states_are_maximally_mixed(graph_rho):
    for rho in group_states(graph_rho).values():
        np.testing.assert_allclose(rho, qmath.I4 / 4, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(densities())
def test_holevo_within_entropy_bounds(rho):
    chi = holevo_protocol_ensemble(rho)
    avg = sum(group_states(rho).values()) / 16
    assert -1e-12 <= chi <= qmath.von_neumann_entropy(avg) + 1e-9 <= 2 + 1e-9


def test_single_group_has_no_information():
    rho = group_states(LAB)[(1, 2)]
    assert qmath.holevo([(1.0, rho)]) == pytest.approx(0, abs=1e-12)


def test_full_average_is_at_least_as_blind():
    assert holevo_protocol_ensemble(LAB, full_average=True) <= holevo_protocol_ensemble(LAB) + 1e-12


def test_conditioned_mode_stays_blind():
    for m in (0, 1):
        rho = averaged_second_qubit(LAB, 5, conditioned=m)
        qmath.check_density(rho, 2)
        assert qmath.fidelity(rho, qmath.I2 / 2) >= 0.98


def test_report_serializes(tmp_path):
    d = blindness_report(LAB).to_dict()
    json.dumps(d)
    assert d["ensemble_size"] == 64
    assert np.array(d["avg_two_qubit"]["re"]).shape == (4, 4)


def test_matrix_csv(tmp_path):
    path = tmp_path / "m.csv"
    write_matrices_csv(LAB, path)
    rows = list(csv.reader(open(path)))
    assert len(rows) == 65 and len(rows[0]) == 2 + 32
    t1, t2 = int(rows[10][0]), int(rows[10][1])
    vals = np.array([float(x) for x in rows[10][2:]])
    m = (vals[0::2] + 1j * vals[1::2]).reshape(4, 4)
    u = np.kron(qmath.rz(t1 * math.pi / 4), qmath.rz(t2 * math.pi / 4))
    np.testing.assert_array_equal(m, qmath.apply(u, LAB))
