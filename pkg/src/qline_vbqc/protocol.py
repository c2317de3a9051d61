"""Roles and round choreography of the two-client verifiable protocol.

Angles are Angle8 codes: integers mod 8 standing for multiples of pi/4, so
every angle the TTP computes is exact. Client index j is 0 for A, 1 for B;
qubit index i is 1 or 2 in public functions and 0 or 1 in tuples.
"""
from __future__ import annotations

import enum
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Iterator, Sequence

import numpy as np

from . import qmath
from .devices import (
    AngleTamper,
    DeviceErrors,
    FixedOutcome,
    Honest,
    NoiseParams,
    OutcomeFlip,
    ServerBehavior,
    StateReplace,
    _Uniforms,
    noisy_source_state,
    perturbed_client_unitary,
    sample_device_errors,
    sample_device_errors_batch,
    server_measure,
)
from .feedforward import (
    DELTA2_TO_FV,
    FFInput,
    V_TO_PC_PHASE,
    encode_outcome,
    ff_lookup,
    physical_angle,
)
from .rng import (
    SLOT_B,
    SLOT_FLIP,
    SLOT_M1,
    SLOT_M2,
    SLOT_R,
    SLOT_ROUND_TYPE,
    SLOT_THETA,
    RoundRNG,
    uniforms,
)

PI = 4
PHASES = ("t0_prepared", "t1_measured_q1", "t2_measured_q2")
THREADS_ENV = "QLINE_VBQC_THREADS"
CHUNK = 4096


def angle_add(a: int, b: int) -> int:
    return (a + b) % 8


def angle_neg(a: int) -> int:
    return (-a) % 8


def angle_add_pi(a: int, bit: int) -> int:
    return (a + PI * (bit & 1)) % 8


def to_radians(a: int) -> float:
    return (a % 8) * math.pi / 4


class RoundType(str, enum.Enum):
    COMPUTATION = "computation"
    TEST = "test"


@dataclass(frozen=True)
class ClientSecrets:
    theta: tuple[int, int] = (0, 0)
    b: tuple[int, int] = (0, 0)
    r: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class Algorithm:
    """Measurement pattern (phi1, phi2) and the clients' input bits."""

    phi: tuple[int, int] = (2, 2)
    x: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if any(not 0 <= p < 8 for p in self.phi):
            raise ValueError("phi entries must be Angle8 codes 0..7")
        if any(b not in (0, 1) for b in self.x):
            raise ValueError("input bits must be 0 or 1")

    def expected_output(self) -> int:
        """m2_true of the noiseless honest computation (pi/2, pi/2 pattern)."""
        return ideal_output(self)


def theta_prime(sa: ClientSecrets, sb: ClientSecrets) -> tuple[int, int]:
    """Effective pad angles after both clients' Rz X^b layers."""
    out = []
    for i in (0, 1):
        other = 1 - i
        signed_a = angle_neg(sa.theta[i]) if sb.b[i] else sa.theta[i]
        out.append(angle_add_pi(angle_add(signed_a, sb.theta[i]), sa.b[other] ^ sb.b[other]))
    return out[0], out[1]


def delta1(theta_prime_1: int, alg: Algorithm, r1: int, round_type: RoundType) -> int:
    x1 = alg.x[0] if round_type is RoundType.COMPUTATION else 0
    return angle_add_pi(angle_add_pi(angle_add(theta_prime_1, alg.phi[0]), x1), r1)


def ff_partial_angle(theta_prime_2: int, alg: Algorithm, r2: int, round_type: RoundType) -> int:
    """The A register of the feed-forward circuit."""
    x2 = alg.x[1] if round_type is RoundType.COMPUTATION else 0
    return angle_add_pi(angle_add_pi(theta_prime_2, x2), r2)


def delta2_branches(theta_prime_2: int, alg: Algorithm, r2: int, round_type: RoundType) -> tuple[int, int]:
    a = ff_partial_angle(theta_prime_2, alg, r2, round_type)
    if round_type is RoundType.TEST:
        d = angle_add(a, alg.phi[1])
        return d, d
    return angle_add(a, alg.phi[1]), angle_add(a, angle_neg(alg.phi[1]))


@dataclass(frozen=True)
class RoundRecord:
    index: int
    round_type: RoundType
    secrets_A: ClientSecrets
    secrets_B: ClientSecrets
    theta_prime: tuple[int, int]
    delta1: int
    delta2: int
    f: int
    V: str
    m1_raw: int
    m2_raw: int
    m1_true: int
    m2_true: int
    phases: tuple[str, ...] = PHASES

    @property
    def r(self) -> tuple[int, int]:
        return (self.secrets_A.r[0] ^ self.secrets_B.r[0], self.secrets_A.r[1] ^ self.secrets_B.r[1])

    @property
    def test_failed(self) -> bool:
        return self.round_type is RoundType.TEST and (self.m1_true ^ self.m2_true) == 1

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["round_type"] = self.round_type.value
        for k in ("secrets_A", "secrets_B"):
            d[k] = {kk: list(vv) for kk, vv in d[k].items()}
        d["theta_prime"] = list(self.theta_prime)
        d["delta2_code"] = f"{self.f}{self.V}"
        d["phases"] = {name: t for t, name in enumerate(self.phases)}
        return d


def draw_secrets(rng: RoundRNG) -> tuple[ClientSecrets, ClientSecrets]:
    th = [int(rng.uniform(s) * 8) for s in SLOT_THETA]
    b = [int(rng.uniform(s) < 0.5) for s in SLOT_B]
    r = [int(rng.uniform(s) < 0.5) for s in SLOT_R]
    return (
        ClientSecrets((th[0], th[1]), (b[0], b[1]), (r[0], r[1])),
        ClientSecrets((th[2], th[3]), (b[2], b[3]), (r[2], r[3])),
    )


def run_round(alg: Algorithm, round_type: RoundType, source_state: np.ndarray,
              device_errors: DeviceErrors, server_behavior: ServerBehavior, rng: RoundRNG,
              realization: str = "pc") -> RoundRecord:
    """One round, step by step, with the scalar state engine.

    ``realization="pc"`` measures the second qubit at the Pockels-cell basis
    and undoes the flip f in post-processing; ``"direct"`` measures at delta2
    itself and records f = 0.
    """
    if realization not in ("pc", "direct"):
        raise ValueError(f"unknown realization {realization!r}")
    behavior = server_behavior
    if isinstance(behavior, StateReplace):
        source_state = behavior.state

    # t0: clients pad their qubits along the line (A first, then B); TTP prepares angles
    sa, sb = draw_secrets(rng)
    tp = theta_prime(sa, sb)
    r1 = sa.r[0] ^ sb.r[0]
    r2 = sa.r[1] ^ sb.r[1]
    d1 = delta1(tp[0], alg, r1, round_type)
    a_reg = ff_partial_angle(tp[1], alg, r2, round_type)
    lc = device_errors.lc
    u = [
        perturbed_client_unitary(sb.theta[i], sb.b[i], lc[1][i]) @ perturbed_client_unitary(sa.theta[i], sa.b[i], lc[0][i])
        for i in (0, 1)
    ]
    rho = qmath.apply(qmath.kron(u[0], u[1]), source_state)

    # t1: first station, then the feed-forward circuit
    m1_raw, rest = server_measure(behavior, rho, 1, to_radians(d1) + device_errors.meas[0],
                                  _Uniforms(rng.uniform(SLOT_M1), rng.uniform(SLOT_FLIP[0])))
    plus, minus = encode_outcome(m1_raw)
    c = int(round_type is RoundType.TEST)
    ff = ff_lookup(FFInput(A=a_reg, B=alg.phi[1], r1=r1, m1_plus=plus, m1_minus=minus, c=c))
    d2 = ff.delta2

    # t2: second station
    if realization == "pc":
        angle, f = physical_angle(d2), ff.f
    else:
        angle, f = d2, 0
    delta_eff = to_radians(angle) + device_errors.meas[1] + device_errors.pc_offset
    m2_raw, _ = server_measure(behavior, rest, 2, delta_eff,
                               _Uniforms(rng.uniform(SLOT_M2), rng.uniform(SLOT_FLIP[1])))
    return RoundRecord(
        index=rng.round_index, round_type=round_type, secrets_A=sa, secrets_B=sb, theta_prime=tp,
        delta1=d1, delta2=d2, f=f, V=ff.V, m1_raw=m1_raw, m2_raw=m2_raw,
        m1_true=ff.m1_true, m2_true=m2_raw ^ r2 ^ f,
    )


def round_type_for(seed: int, index: int, test_fraction: float) -> RoundType:
    u = uniforms(seed, [index], SLOT_ROUND_TYPE)[0]
    return RoundType.TEST if u < test_fraction else RoundType.COMPUTATION


def run_round_at(alg: Algorithm, seed: int, index: int, test_fraction: float, noise: NoiseParams,
                 behavior: ServerBehavior, realization: str = "pc") -> RoundRecord:
    """Scalar counterpart of the batch engine for round ``index``."""
    rng = RoundRNG(seed, index)
    return run_round(alg, round_type_for(seed, index, test_fraction), noisy_source_state(noise),
                     sample_device_errors(noise, rng), behavior, rng, realization)


# --- vectorized engine ------------------------------------------------------

_F_OF = np.array([DELTA2_TO_FV[d][0] for d in range(8)], dtype=np.int8)
_PC_OF = np.array([V_TO_PC_PHASE[DELTA2_TO_FV[d][1]] for d in range(8)], dtype=np.int8)
_X = qmath.pauli_x()


def _rz_batch(angle: np.ndarray) -> np.ndarray:
    out = np.zeros(angle.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = 1
    out[..., 1, 1] = np.exp(1j * angle)
    return out


def _client_layer(theta, b, err) -> np.ndarray:
    u = _rz_batch(theta * (np.pi / 4) + err)
    return np.where(b[:, None, None].astype(bool), u @ _X, u)


def _eq_kets(delta: np.ndarray) -> np.ndarray:
    e = np.empty(delta.shape + (2,), dtype=complex)
    e[..., 0] = 1 / np.sqrt(2)
    e[..., 1] = np.exp(1j * delta) / np.sqrt(2)
    return e


def _dag(m: np.ndarray) -> np.ndarray:
    return m.conj().transpose(0, 2, 1)


def _branch(rho: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Unnormalized qubit-2 state after projecting qubit 1 of each ``rho`` on ``e``."""
    w = np.zeros((e.shape[0], 4, 2), dtype=complex)
    w[:, 0, 0] = w[:, 1, 1] = e[:, 0]
    w[:, 2, 0] = w[:, 3, 1] = e[:, 1]
    return _dag(w) @ rho @ w


def simulate_rounds(alg: Algorithm, seed: int, rounds: np.ndarray, test_fraction: float,
                    noise: NoiseParams, behavior: ServerBehavior, realization: str = "pc") -> dict[str, np.ndarray]:
    """Vectorized execution of the given round indices; returns column arrays."""
    rounds = np.asarray(rounds, dtype=np.int64)
    n = rounds.shape[0]
    u = lambda slot: uniforms(seed, rounds, slot)  # noqa: E731

    is_test = u(SLOT_ROUND_TYPE) < test_fraction
    theta = np.stack([(u(s) * 8).astype(np.int64) for s in SLOT_THETA], axis=1).reshape(n, 2, 2)
    b = np.stack([(u(s) < 0.5).astype(np.int64) for s in SLOT_B], axis=1).reshape(n, 2, 2)
    r = np.stack([(u(s) < 0.5).astype(np.int64) for s in SLOT_R], axis=1).reshape(n, 2, 2)
    rq = r[:, 0, :] ^ r[:, 1, :]

    tp = np.empty((n, 2), dtype=np.int64)
    for i in (0, 1):
        o = 1 - i
        signed_a = np.where(b[:, 1, i] == 1, -theta[:, 0, i], theta[:, 0, i])
        tp[:, i] = (signed_a + theta[:, 1, i] + PI * (b[:, 0, o] ^ b[:, 1, o])) % 8
    comp = (~is_test).astype(np.int64)
    d1 = (tp[:, 0] + alg.phi[0] + PI * (alg.x[0] * comp) + PI * rq[:, 0]) % 8
    a_reg = (tp[:, 1] + PI * (alg.x[1] * comp) + PI * rq[:, 1]) % 8

    dev = sample_device_errors_batch(noise, seed, rounds)
    lc = dev["lc"]
    ulay = [
        _client_layer(theta[:, 1, i], b[:, 1, i], lc[:, 1, i]) @ _client_layer(theta[:, 0, i], b[:, 0, i], lc[:, 0, i])
        for i in (0, 1)
    ]
    source = behavior.state if isinstance(behavior, StateReplace) else noisy_source_state(noise)
    u4 = (ulay[0][:, :, None, :, None] * ulay[1][:, None, :, None, :]).reshape(n, 4, 4)
    rho = u4 @ np.asarray(source, dtype=complex) @ _dag(u4)

    tamper = behavior.offsets if isinstance(behavior, AngleTamper) else (0, 0)
    fixed = behavior.bits if isinstance(behavior, FixedOutcome) else (None, None)
    flips = behavior.probs if isinstance(behavior, OutcomeFlip) else (0.0, 0.0)

    # first station
    a1 = (d1 + tamper[0]) * (np.pi / 4) + dev["meas"][:, 0]
    e0 = _eq_kets(a1)
    e1 = _eq_kets(a1 + np.pi)
    s0 = _branch(rho, e0)
    s1 = _branch(rho, e1)
    p0 = np.clip(np.real(s0[:, 0, 0] + s0[:, 1, 1]), 0.0, 1.0)
    p1 = np.real(s1[:, 0, 0] + s1[:, 1, 1])
    phys1 = (u(SLOT_M1) >= p0).astype(np.int64)
    phys1 = np.where(p1 < qmath.PROB_FLOOR, 0, np.where(p0 < qmath.PROB_FLOOR, 1, phys1))
    if fixed[0] is not None:
        branch = np.full(n, fixed[0], dtype=np.int64)
        m1_raw = branch
    else:
        branch = phys1
        m1_raw = phys1 ^ (u(SLOT_FLIP[0]) < flips[0]).astype(np.int64)
    sb_ = np.where(branch[:, None, None] == 0, s0, s1)
    pb = np.where(branch == 0, p0, p1)
    safe = pb > qmath.PROB_FLOOR
    rest = np.where(safe[:, None, None], sb_ / np.where(safe, pb, 1.0)[:, None, None], qmath.I2 / 2)

    # feed-forward
    m1_true = m1_raw ^ rq[:, 0]
    sign = np.where(m1_true == 0, 1, -1)
    d2 = np.where(is_test, a_reg + alg.phi[1], a_reg + sign * alg.phi[1]) % 8
    f_tab = _F_OF[d2].astype(np.int64)
    if realization == "pc":
        angle = (-_PC_OF[d2].astype(np.int64)) % 8
        f = f_tab
    elif realization == "direct":
        angle = d2
        f = np.zeros(n, dtype=np.int64)
    else:
        raise ValueError(f"unknown realization {realization!r}")

    # second station
    a2 = (angle + tamper[1]) * (np.pi / 4) + dev["meas"][:, 1] + dev["pc"]
    g0 = _eq_kets(a2)
    q0 = np.clip(np.real(np.sum(g0.conj() * (rest @ g0[:, :, None])[:, :, 0], axis=1)), 0.0, 1.0)
    phys2 = (u(SLOT_M2) >= q0).astype(np.int64)
    phys2 = np.where(1 - q0 < qmath.PROB_FLOOR, 0, np.where(q0 < qmath.PROB_FLOOR, 1, phys2))
    if fixed[1] is not None:
        m2_raw = np.full(n, fixed[1], dtype=np.int64)
    else:
        m2_raw = phys2 ^ (u(SLOT_FLIP[1]) < flips[1]).astype(np.int64)

    return {
        "index": rounds,
        "is_test": is_test,
        "theta": theta,
        "b": b,
        "r": r,
        "theta_prime": tp,
        "delta1": d1,
        "delta2": d2,
        "f": f,
        "f_table": f_tab,
        "m1_raw": m1_raw,
        "m2_raw": m2_raw,
        "m1_true": m1_true,
        "m2_true": m2_raw ^ rq[:, 1] ^ f,
    }


@dataclass
class Transcript:
    """All rounds of one run, stored column-wise.

    ``records`` and iteration materialize :class:`RoundRecord` objects on
    demand; statistics work on the columns directly.
    """

    config: dict[str, Any]
    seed: int
    columns: dict[str, np.ndarray] = field(repr=False)

    def __len__(self) -> int:
        return int(self.columns["index"].shape[0])

    @property
    def is_test(self) -> np.ndarray:
        return self.columns["is_test"]

    @property
    def m1_true(self) -> np.ndarray:
        return self.columns["m1_true"]

    @property
    def m2_true(self) -> np.ndarray:
        return self.columns["m2_true"]

    def record(self, k: int) -> RoundRecord:
        c = self.columns
        sec = [
            ClientSecrets(
                theta=(int(c["theta"][k, j, 0]), int(c["theta"][k, j, 1])),
                b=(int(c["b"][k, j, 0]), int(c["b"][k, j, 1])),
                r=(int(c["r"][k, j, 0]), int(c["r"][k, j, 1])),
            )
            for j in (0, 1)
        ]
        d2 = int(c["delta2"][k])
        return RoundRecord(
            index=int(c["index"][k]),
            round_type=RoundType.TEST if c["is_test"][k] else RoundType.COMPUTATION,
            secrets_A=sec[0], secrets_B=sec[1],
            theta_prime=(int(c["theta_prime"][k, 0]), int(c["theta_prime"][k, 1])),
            delta1=int(c["delta1"][k]), delta2=d2,
            f=int(c["f"][k]), V=DELTA2_TO_FV[d2][1],
            m1_raw=int(c["m1_raw"][k]), m2_raw=int(c["m2_raw"][k]),
            m1_true=int(c["m1_true"][k]), m2_true=int(c["m2_true"][k]),
        )

    def __iter__(self) -> Iterator[RoundRecord]:
        return (self.record(k) for k in range(len(self)))

    @property
    def records(self) -> list[RoundRecord]:
        return list(self)

    def iter_jsonl(self) -> Iterator[str]:
        for rec in self:
            yield json.dumps(rec.to_dict(), sort_keys=True)

    def write_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for line in self.iter_jsonl():
                fh.write(line + "\n")


def _threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1"))
    return max(1, threads)


def run_protocol(alg: Algorithm, n: int, test_fraction: float = 0.5, noise: NoiseParams | None = None,
                 behavior: ServerBehavior | None = None, seed: int = 0, realization: str = "pc",
                 threads: int | None = None) -> Transcript:
    """Run ``n`` rounds; the result depends only on the arguments, not on ``threads``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    noise = NoiseParams.lab_default() if noise is None else noise
    behavior = Honest() if behavior is None else behavior
    chunks = [np.arange(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]
    job = lambda idx: simulate_rounds(alg, seed, idx, test_fraction, noise, behavior, realization)  # noqa: E731
    nthreads = _threads(threads)
    if nthreads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            parts = list(pool.map(job, chunks))
    else:
        parts = [job(c) for c in chunks]
    columns = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
    config = {
        "algorithm": {"phi": list(alg.phi), "x": list(alg.x)},
        "n": n,
        "test_fraction": test_fraction,
        "noise": asdict(noise),
        "adversary": behavior.describe(),
        "realization": realization,
    }
    return Transcript(config=config, seed=seed, columns=columns)


# --- exact oracle -------------------------------------------------------------


def outcome_distribution(alg: Algorithm, round_type: RoundType, sa: ClientSecrets, sb: ClientSecrets,
                         source_state: np.ndarray | None = None) -> np.ndarray:
    """Exact P(m1_true, m2_true) for an honest server with ideal devices.

    Written against the textbook picture (direct delta2 measurement, Born
    rule on the full joint state) rather than the round engine.
    """
    rho = qmath.projector(qmath.graph_state()) if source_state is None else source_state
    layer = []
    for i in (0, 1):
        u = qmath.I2
        for s in (sa, sb):
            u = qmath.rz(to_radians(s.theta[i])) @ np.linalg.matrix_power(qmath.pauli_x(), s.b[i]) @ u
        layer.append(u)
    rho = qmath.apply(np.kron(layer[0], layer[1]), rho)
    tp = theta_prime(sa, sb)
    r1 = sa.r[0] ^ sb.r[0]
    r2 = sa.r[1] ^ sb.r[1]
    d1 = delta1(tp[0], alg, r1, round_type)
    branches = delta2_branches(tp[1], alg, r2, round_type)
    out = np.zeros((2, 2))
    for m1 in (0, 1):
        e1 = qmath.equatorial_ket(to_radians(d1) + m1 * math.pi)
        m1_true = m1 ^ r1
        d2 = branches[m1_true]
        for m2 in (0, 1):
            e2 = qmath.equatorial_ket(to_radians(d2) + m2 * math.pi)
            proj = np.kron(qmath.projector(e1), qmath.projector(e2))
            out[m1_true, m2 ^ r2] += np.real(np.trace(proj @ rho))
    return out


def ideal_output(alg: Algorithm) -> int:
    """Deterministic m2_true of the noiseless computation (all secrets zero)."""
    dist = outcome_distribution(alg, RoundType.COMPUTATION, ClientSecrets(), ClientSecrets())
    p_m2 = dist.sum(axis=0)
    if not np.isclose(p_m2.max(), 1.0, atol=1e-12):
        raise ValueError(f"algorithm {alg} has no deterministic output: P(m2) = {p_m2}")
    return int(np.argmax(p_m2))


def blind_angles(alg: Algorithm, m1_raw: int, round_type: RoundType,
                 secrets: Sequence[tuple[ClientSecrets, ClientSecrets]]) -> list[tuple[int, int]]:
    """(delta1, delta2) the server sees for each secret tuple, given its reported m1."""
    out = []
    for sa, sb in secrets:
        tp = theta_prime(sa, sb)
        r1 = sa.r[0] ^ sb.r[0]
        r2 = sa.r[1] ^ sb.r[1]
        branches = delta2_branches(tp[1], alg, r2, round_type)
        out.append((delta1(tp[0], alg, r1, round_type), branches[m1_raw ^ r1]))
    return out
