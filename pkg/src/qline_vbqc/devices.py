"""Untrusted source noise, optical device errors and server strategies."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import qmath
from .rng import SLOT_LC, SLOT_MEAS_ERR, SLOT_PC, uniforms


@dataclass(frozen=True)
class NoiseParams:
    """Source mixture parameters and optical error magnitudes.

    ``lc_err_halfwidth`` is in radians (uniform support of one liquid
    crystal's phase error), ``hwp_err_halfwidth`` in degrees of waveplate
    misalignment, ``pc_phase_offset`` in radians on the second station.
    """

    v: float = 0.935
    lam: float = 0.493
    lc_err_halfwidth: float = math.pi / 8
    hwp_err_halfwidth: float = 1.0
    pc_phase_offset: float = math.pi / 16
    pc_random: bool = False

    def __post_init__(self):
        for name in ("v", "lam"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name}={val} outside [0, 1]")
        for name in ("lc_err_halfwidth", "hwp_err_halfwidth", "pc_phase_offset"):
            val = getattr(self, name)
            if not math.isfinite(val) or val < 0:
                raise ValueError(f"{name}={val} must be finite and >= 0")

    @classmethod
    def lab_default(cls) -> "NoiseParams":
        return cls()

    @classmethod
    def ideal(cls) -> "NoiseParams":
        return cls(v=1.0, lam=0.0, lc_err_halfwidth=0.0, hwp_err_halfwidth=0.0, pc_phase_offset=0.0)

    @property
    def is_ideal(self) -> bool:
        return self.v == 1.0 and self.lc_err_halfwidth == 0 and self.hwp_err_halfwidth == 0 and self.pc_phase_offset == 0


@dataclass(frozen=True)
class DeviceErrors:
    """Per-round perturbations in radians.

    ``lc[j][i]`` is client j's (0 = A, 1 = B) error on qubit i+1.
    """

    lc: tuple[tuple[float, float], tuple[float, float]] = ((0.0, 0.0), (0.0, 0.0))
    meas: tuple[float, float] = (0.0, 0.0)
    pc_offset: float = 0.0


def noisy_source_state(p: NoiseParams) -> np.ndarray:
    """Source density matrix in the graph-state frame.

    The white/colored mixture is defined on the Bell pair; the fixed local
    map (I x H) takes the noiseless pair onto the graph state.
    """
    phi_p = qmath.projector(qmath.bell_phi_plus())
    phi_m = qmath.projector(qmath.bell_phi_minus())
    rho = p.v * phi_p + (1 - p.v) * (p.lam / 2 * (phi_p + phi_m) + (1 - p.lam) / 4 * qmath.I4)
    return qmath.apply(qmath.kron(qmath.I2, qmath.hadamard()), rho)


def sample_device_errors_batch(p: NoiseParams, seed: int, rounds) -> dict[str, np.ndarray]:
    """Vectorized device-error draws for the given round indices."""
    rounds = np.asarray(rounds)
    n = rounds.shape[0]
    lc = np.empty((n, 2, 2))
    for k, slot in enumerate(SLOT_LC):
        lc[:, k // 2, k % 2] = (2 * uniforms(seed, rounds, slot) - 1) * p.lc_err_halfwidth
    # waveplate misalignment eta rotates the analysed equatorial angle by 2 eta
    meas_hw = math.radians(2 * p.hwp_err_halfwidth)
    meas = np.stack([(2 * uniforms(seed, rounds, s) - 1) * meas_hw for s in SLOT_MEAS_ERR], axis=1)
    if p.pc_random:
        pc = (2 * uniforms(seed, rounds, SLOT_PC) - 1) * 2 * p.pc_phase_offset
    else:
        pc = np.full(n, p.pc_phase_offset)
    return {"lc": lc, "meas": meas, "pc": pc}


def sample_device_errors(p: NoiseParams, rng) -> DeviceErrors:
    """Device errors for the round behind ``rng`` (a :class:`RoundRNG`)."""
    d = sample_device_errors_batch(p, rng.seed, [rng.round_index])
    lc = d["lc"][0]
    return DeviceErrors(
        lc=((float(lc[0, 0]), float(lc[0, 1])), (float(lc[1, 0]), float(lc[1, 1]))),
        meas=(float(d["meas"][0, 0]), float(d["meas"][0, 1])),
        pc_offset=float(d["pc"][0]),
    )


def perturbed_client_unitary(theta: int, b: int, lc_err: float) -> np.ndarray:
    u = qmath.rz(theta * math.pi / 4 + lc_err)
    return u @ qmath.pauli_x() if b else u


# --- server strategies -----------------------------------------------------


@dataclass(frozen=True)
class Honest:
    def describe(self) -> str:
        return "honest"


@dataclass(frozen=True)
class FixedOutcome:
    """Report a fixed bit on each qubit; ``None`` leaves that qubit honest."""

    bits: tuple[int | None, int | None] = (None, 0)

    def describe(self) -> str:
        return "fixed-outcome:" + ",".join(f"q{i + 1}={b}" for i, b in enumerate(self.bits) if b is not None)


@dataclass(frozen=True)
class OutcomeFlip:
    probs: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if not all(0.0 <= p <= 1.0 for p in self.probs):
            raise ValueError("flip probabilities must lie in [0, 1]")

    def describe(self) -> str:
        return "outcome-flip:" + ",".join(f"q{i + 1}={p}" for i, p in enumerate(self.probs))


@dataclass(frozen=True)
class AngleTamper:
    offsets: tuple[int, int] = (0, 4)

    def describe(self) -> str:
        return "angle-tamper:" + ",".join(f"q{i + 1}={o}" for i, o in enumerate(self.offsets))


@dataclass(frozen=True, eq=False)
class StateReplace:
    state: np.ndarray = field(default_factory=lambda: qmath.projector(qmath.ket("00")))
    name: str = "product00"

    def describe(self) -> str:
        return f"state-replace:{self.name}"


ServerBehavior = Union[Honest, FixedOutcome, OutcomeFlip, AngleTamper, StateReplace]

REPLACEMENT_STATES = {
    "product00": lambda: qmath.projector(qmath.ket("00")),
    "plus-plus": lambda: qmath.projector(np.full(4, 0.5, dtype=complex)),
    "mixed": lambda: qmath.I4 / 4,
    "graph": lambda: qmath.projector(qmath.graph_state()),
}


def parse_behavior(desc: str) -> ServerBehavior:
    """Parse descriptors like ``fixed-outcome:q2=0`` or ``angle-tamper:q2=4``."""
    name, _, args = desc.strip().partition(":")
    kv = {}
    for item in filter(None, (a.strip() for a in args.split(","))):
        k, sep, val = item.partition("=")
        if not sep:
            kv[k] = None
        else:
            kv[k.strip()] = val.strip()

    def per_qubit(conv, default):
        out = list(default)
        for k, val in kv.items():
            if k not in ("q1", "q2"):
                raise ValueError(f"unknown adversary argument {k!r} in {desc!r}")
            out[int(k[1]) - 1] = conv(val)
        return tuple(out)

    if name == "honest":
        return Honest()
    if name == "fixed-outcome":
        bits = per_qubit(int, (None, None)) if kv else (None, 0)
        if any(b not in (None, 0, 1) for b in bits):
            raise ValueError("fixed outcome bits must be 0 or 1")
        return FixedOutcome(bits)
    if name == "outcome-flip":
        return OutcomeFlip(per_qubit(float, (0.0, 0.0)) if kv else (0.0, 1.0))
    if name == "angle-tamper":
        return AngleTamper(per_qubit(lambda s: int(s) % 8, (0, 0)) if kv else (0, 4))
    if name == "state-replace":
        which = args.strip() or "product00"
        if which not in REPLACEMENT_STATES:
            raise ValueError(f"unknown replacement state {which!r}")
        return StateReplace(REPLACEMENT_STATES[which](), which)
    raise ValueError(f"unknown adversary {name!r}")


class _Uniforms:
    def __init__(self, *us: float):
        self._us = list(us)

    def random(self) -> float:
        return self._us.pop(0)


def server_measure(behavior: ServerBehavior, rho: np.ndarray, qubit: int, delta_effective: float,
                   rng) -> tuple[int, np.ndarray]:
    """Measurement as performed (and reported) by the server.

    ``rng.random()`` is called once for the physical outcome and, for
    :class:`OutcomeFlip`, once more for the flip decision. ``rho`` is the
    joint state when measuring qubit 1 and the surviving single-qubit state
    when measuring qubit 2.
    """
    rho = np.asarray(rho, dtype=complex)
    target = 1 if rho.shape == (2, 2) else qubit
    idx = qubit - 1
    if isinstance(behavior, AngleTamper):
        delta_effective += behavior.offsets[idx] * math.pi / 4
    if isinstance(behavior, FixedOutcome) and behavior.bits[idx] is not None:
        want = behavior.bits[idx]
        rng.random()
        return want, _projected(rho, target, delta_effective, want)
    m, post, _ = qmath.measure_equatorial(rho, target, delta_effective, rng)
    if isinstance(behavior, OutcomeFlip) and rng.random() < behavior.probs[idx]:
        m ^= 1
    return m, post


def _projected(rho, qubit, delta, outcome):
    e = qmath.equatorial_ket(delta + outcome * math.pi)
    if rho.shape == (2, 2):
        return qmath.projector(e)
    r = rho.reshape(2, 2, 2, 2)
    if qubit == 1:
        s = np.einsum("a,ajbk,b->jk", e.conj(), r, e)
    else:
        s = np.einsum("a,jakb,b->jk", e.conj(), r, e)
    p = np.trace(s).real
    return s / p if p > qmath.PROB_FLOOR else qmath.I2 / 2
