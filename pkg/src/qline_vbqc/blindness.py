"""What the server can learn from the padded state it receives.

Averages run over the clients' Rz pads with every other secret fixed to zero,
the same 64-combination scans used for the tomographic blindness checks.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import qmath

ANGLES = range(8)


def _padded(source: np.ndarray, t1: int, t2: int) -> np.ndarray:
    u = qmath.kron(qmath.rz(t1 * math.pi / 4), qmath.rz(t2 * math.pi / 4))
    return qmath.apply(u, source)


def averaged_second_qubit(source: np.ndarray, delta1: int = 5, conditioned: int | None = None) -> np.ndarray:
    """Qubit-2 state averaged over all (theta1_A, theta1_B) after qubit 1 is measured at ``delta1``.

    By default both outcomes of the first measurement are kept (Born
    weighted). With ``conditioned`` set to 0 or 1 each of the 64 states is the
    post-measurement state for that outcome instead.
    """
    e = [qmath.equatorial_ket(delta1 * math.pi / 4 + m * math.pi) for m in (0, 1)]
    acc = np.zeros((2, 2), dtype=complex)
    for ta, tb in product(ANGLES, ANGLES):
        rho = _padded(source, ta + tb, 0).reshape(2, 2, 2, 2)
        branches = [np.einsum("a,ajbk,b->jk", em.conj(), rho, em) for em in e]
        if conditioned is None:
            acc += branches[0] + branches[1]
        else:
            s = branches[conditioned]
            p = np.trace(s).real
            acc += s / p if p > qmath.PROB_FLOOR else qmath.I2 / 2
    return acc / 64


def averaged_two_qubit(source: np.ndarray) -> np.ndarray:
    acc = np.zeros((4, 4), dtype=complex)
    for ta, tb in product(ANGLES, ANGLES):
        acc += _padded(source, ta, tb)
    return acc / 64


def holevo_groups() -> dict[tuple[int, int], list[tuple[int, int]]]:
    """The 16 groups of (theta1_A, theta2_B) related by pi shifts, keyed by their representative in {0..3}^2."""
    groups: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for t1, t2 in product(ANGLES, ANGLES):
        groups.setdefault((t1 % 4, t2 % 4), []).append((t1, t2))
    return groups


def group_states(source: np.ndarray, full_average: bool = False) -> dict[tuple[int, int], np.ndarray]:
    """Uniform average within each pi-shift group.

    ``full_average`` also averages over the two pads that the scan otherwise
    fixes at zero (theta2_A and theta1_B); since those pads add to the same
    qubit angles this only re-weights the group members.
    """
    out = {}
    for key, members in holevo_groups().items():
        acc = np.zeros((4, 4), dtype=complex)
        count = 0
        for t1, t2 in members:
            extra = product(ANGLES, ANGLES) if full_average else [(0, 0)]
            for e1, e2 in extra:
                acc += _padded(source, t1 + e1, t2 + e2)
                count += 1
        out[key] = acc / count
    return out


def holevo_protocol_ensemble(source: np.ndarray, full_average: bool = False) -> float:
    states = group_states(source, full_average)
    return qmath.holevo([(1 / len(states), rho) for rho in states.values()])


@dataclass
class BlindnessReport:
    avg_single_qubit: np.ndarray
    F_1q: float
    avg_two_qubit: np.ndarray
    F_2q: float
    chi: float
    ensemble_size: int = 64

    def to_dict(self) -> dict:
        def mat(m):
            return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}

        return {
            "avg_single_qubit": mat(self.avg_single_qubit),
            "F_1q": self.F_1q,
            "avg_two_qubit": mat(self.avg_two_qubit),
            "F_2q": self.F_2q,
            "chi": self.chi,
            "ensemble_size": self.ensemble_size,
        }


def blindness_report(source: np.ndarray, delta1: int = 5, conditioned: int | None = None) -> BlindnessReport:
    one = averaged_second_qubit(source, delta1, conditioned)
    two = averaged_two_qubit(source)
    return BlindnessReport(
        avg_single_qubit=one,
        F_1q=qmath.fidelity(one, qmath.I2 / 2),
        avg_two_qubit=two,
        F_2q=qmath.fidelity(two, qmath.I4 / 4),
        chi=holevo_protocol_ensemble(source),
    )


def write_matrices_csv(source: np.ndarray, path) -> None:
    """All 64 padded two-qubit states, one row each, entries row-major with re/im interleaved."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta1_A", "theta2_B"] + [f"{part}{i}{j}" for i in range(4) for j in range(4) for part in ("re", "im")])
        for t1, t2 in product(ANGLES, ANGLES):
            m = _padded(source, t1, t2)
            row = []
            for z in m.reshape(-1):
                row += [repr(float(z.real)), repr(float(z.imag))]
            w.writerow([t1, t2] + row)
