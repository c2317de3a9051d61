import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qline_vbqc import qmath
from qline_vbqc.devices import DeviceErrors, Honest, NoiseParams
from qline_vbqc.protocol import (
    Algorithm,
    ClientSecrets,
    RoundType,
    angle_add,
    angle_add_pi,
    angle_neg,
    blind_angles,
    delta1,
    delta2_branches,
    ideal_output,
    outcome_distribution,
    run_protocol,
    run_round,
    run_round_at,
    theta_prime,
)
from qline_vbqc.rng import RoundRNG

ALG0 = Algorithm((2, 2), (0, 0))
ALG1 = Algorithm((2, 2), (1, 0))
COMP, TEST = RoundType.COMPUTATION, RoundType.TEST

secrets_st = st.builds(
    ClientSecrets,
    theta=st.tuples(st.integers(0, 7), st.integers(0, 7)),
    b=st.tuples(st.integers(0, 1), st.integers(0, 1)),
    r=st.tuples(st.integers(0, 1), st.integers(0, 1)),
)


def sample_secrets(rng, n):
    for _ in range(n):
        th = rng.integers(0, 8, 4)
        b = rng.integers(0, 2, 4)
        r = rng.integers(0, 2, 4)
        yield (ClientSecrets((int(th[0]), int(th[1])), (int(b[0]), int(b[1])), (int(r[0]), int(r[1]))),
               ClientSecrets((int(th[2]), int(th[3])), (int(b[2]), int(b[3])), (int(r[2]), int(r[3]))))


def test_angle_arithmetic():
    assert angle_add(3, 6) == 1
    assert angle_neg(3) == 5
    assert angle_add_pi(2, 1) == 6
    assert angle_add_pi(2, 0) == 2


@given(st.integers(0, 7), st.integers(0, 7))
def test_angle_group(a, b):
    assert angle_add(a, angle_neg(a)) == 0
    assert angle_add(a, b) == angle_add(b, a)
    assert angle_add_pi(angle_add_pi(a, 1), 1) == a


def test_theta_prime_examples():
    sa = ClientSecrets(theta=(1, 0))
    sb = ClientSecrets(theta=(2, 0))
    assert theta_prime(sa, sb)[0] == 3
    sa = ClientSecrets(theta=(1, 0), b=(0, 1))
    sb = ClientSecrets(theta=(2, 0), b=(1, 0))
    assert theta_prime(sa, sb)[0] == 5


@given(secrets_st, secrets_st)
def test_theta_prime_mirror_symmetry(sa, sb):
    swap = lambda s: ClientSecrets(s.theta[::-1], s.b[::-1], s.r[::-1])  # noqa: E731
    assert theta_prime(sa, sb)[1] == theta_prime(swap(sa), swap(sb))[0]


def test_delta_examples():
    assert delta1(0, Algorithm((2, 2), (0, 0)), 0, COMP) == 2
    assert delta1(0, Algorithm((2, 2), (1, 0)), 1, COMP) == 2
    assert delta1(5, Algorithm((2, 2), (1, 0)), 0, TEST) == 7
    assert delta2_branches(0, ALG0, 0, COMP) == (2, 6)
    assert delta2_branches(0, ALG0, 0, TEST) == (2, 2)
    assert delta2_branches(3, Algorithm((2, 2), (0, 1)), 1, COMP) == (5, 1)


def test_test_round_x_omitted_is_what_makes_tests_pass():
    # with x1 kept in the test delta1 the Y(x)Y check would always fail for x1 = 1
    sa, sb = ClientSecrets(), ClientSecrets()
    dist = outcome_distribution(ALG1, TEST, sa, sb)
    assert dist[0, 0] + dist[1, 1] == pytest.approx(1, abs=1e-12)


@given(secrets_st, secrets_st)
@settings(max_examples=300, deadline=None)
def test_qline_layers_equal_theta_prime_rotation(sa, sb):
    """Client A then client B on the graph state equals Rz(theta'_1) x Rz(theta'_2) up to phase."""
    layer = []
    for i in (0, 1):
        u = qmath.I2
        for s in (sa, sb):
            u = qmath.rz(s.theta[i] * math.pi / 4) @ np.linalg.matrix_power(qmath.pauli_x(), s.b[i]) @ u
        layer.append(u)
    got = np.kron(*layer) @ qmath.graph_state()
    tp = theta_prime(sa, sb)
    want = np.kron(qmath.rz(tp[0] * math.pi / 4), qmath.rz(tp[1] * math.pi / 4)) @ qmath.graph_state()
    assert abs(np.vdot(want, got)) == pytest.approx(1, abs=1e-12)


def test_ideal_outputs():
    assert ideal_output(ALG0) == 0
    assert ideal_output(ALG1) == 1
    assert ALG0.expected_output() == 0


@pytest.mark.parametrize("alg", [ALG0, ALG1], ids=["x=00", "x=10"])
def test_one_time_pad_correctness(alg):
    want = ideal_output(alg)
    rng = np.random.default_rng(11)
    for sa, sb in sample_secrets(rng, 10_000):
        dist = outcome_distribution(alg, COMP, sa, sb)
        assert dist[:, want].sum() == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("alg", [ALG0, ALG1], ids=["x=00", "x=10"])
def test_test_round_parity(alg):
    rng = np.random.default_rng(12)
    for sa, sb in sample_secrets(rng, 10_000):
        dist = outcome_distribution(alg, TEST, sa, sb)
        assert dist[0, 0] + dist[1, 1] == pytest.approx(1, abs=1e-12)


def _all_secret_tuples():
    # r enters only through r_i = r_i^A xor r_i^B, so r^B = 0 covers each r_i once;
    # every multiplicity below is then 1/4 of the full 2^20 enumeration
    for th in itertools.product(range(8), repeat=4):
        for b in itertools.product((0, 1), repeat=4):
            for r in itertools.product((0, 1), repeat=2):
                yield (ClientSecrets((th[0], th[1]), (b[0], b[1]), r),
                       ClientSecrets((th[2], th[3]), (b[2], b[3]), (0, 0)))


@pytest.mark.parametrize("alg", [ALG0, ALG1], ids=["x=00", "x=10"])
@pytest.mark.parametrize("round_type", [COMP, TEST])
@pytest.mark.parametrize("m1", [0, 1])
def test_blind_angles_uniform_by_enumeration(alg, round_type, m1):
    counts = Counter(blind_angles(alg, m1, round_type, _all_secret_tuples()))
    assert len(counts) == 64
    assert set(counts.values()) == {2**18 // 64}


def test_run_round_ideal_test_and_computation():
    src = qmath.projector(qmath.graph_state())
    for k in range(200):
        rng = RoundRNG(5, k)
        rec = run_round(ALG0, TEST, src, DeviceErrors(), Honest(), rng)
        assert rec.m1_true == rec.m2_true
        rec = run_round(ALG0, COMP, src, DeviceErrors(), Honest(), rng)
        assert rec.m2_true == 0
        rec = run_round(ALG1, COMP, src, DeviceErrors(), Honest(), rng)
        assert rec.m2_true == 1


def test_record_invariants_and_branch_selection():
    t = run_protocol(ALG1, 3000, 0.5, NoiseParams.lab_default(), Honest(), seed=9)
    for rec in t.records[:500]:
        r1, r2 = rec.r
        assert rec.m1_true == rec.m1_raw ^ r1
        assert rec.m2_true == rec.m2_raw ^ r2 ^ rec.f
        assert list(rec.phases) == ["t0_prepared", "t1_measured_q1", "t2_measured_q2"]
        tp = theta_prime(rec.secrets_A, rec.secrets_B)
        assert rec.theta_prime == tp
        assert rec.delta1 == delta1(tp[0], ALG1, r1, rec.round_type)
        assert rec.delta2 == delta2_branches(tp[1], ALG1, r2, rec.round_type)[rec.m1_true]


@pytest.mark.parametrize("realization", ["pc", "direct"])
def test_scalar_and_batch_engines_agree(realization):
    noise = NoiseParams.lab_default()
    t = run_protocol(ALG0, 400, 0.5, noise, Honest(), seed=77, realization=realization)
    for k in range(400):
        assert run_round_at(ALG0, 77, k, 0.5, noise, Honest(), realization) == t.record(k)


def test_determinism_and_order_independence():
    a = run_protocol(ALG0, 9000, 0.3, seed=5)
    b = run_protocol(ALG0, 9000, 0.3, seed=5, threads=3)
    assert list(a.iter_jsonl()) == list(b.iter_jsonl())
    # a round's record does not depend on how many rounds are run
    short = run_protocol(ALG0, 100, 0.3, seed=5)
    assert short.record(99) == a.record(99)
    assert list(run_protocol(ALG0, 50, 0.3, seed=6).iter_jsonl()) != list(a.iter_jsonl())[:50]


def test_round_type_fraction():
    t = run_protocol(ALG0, 20000, 0.25, NoiseParams.ideal(), seed=3)
    frac = t.is_test.mean()
    assert abs(frac - 0.25) < 3 * math.sqrt(0.25 * 0.75 / 20000)


@pytest.mark.parametrize("tf", [0.0, 1.0, -0.1])
def test_test_fraction_rejected(tf):
    with pytest.raises(ValueError):
        run_protocol(ALG0, 10, tf)


def test_zero_rounds_rejected():
    with pytest.raises(ValueError):
        run_protocol(ALG0, 0)
