"""Dense linear algebra for one and two qubits.

States and gates are plain complex numpy arrays. Qubit 1 is always the left
tensor factor, so basis order is |00>, |01>, |10>, |11> with the first digit
belonging to qubit 1.
"""
from __future__ import annotations

from typing import Protocol, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
EIG_TOL = 1e-9
PROB_FLOOR = 1e-15

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)


class InvalidStateError(ValueError):
    """Raised when a matrix is not a valid density matrix."""


class UniformSource(Protocol):
    def random(self) -> float: ...


def graph_state() -> np.ndarray:
    return np.array([0.5, 0.5, 0.5, -0.5], dtype=complex)


def bell_phi_plus() -> np.ndarray:
    s = 1 / np.sqrt(2)
    return np.array([s, 0, 0, s], dtype=complex)


def bell_phi_minus() -> np.ndarray:
    s = 1 / np.sqrt(2)
    return np.array([s, 0, 0, -s], dtype=complex)


def rz(theta: float) -> np.ndarray:
    # diag(1, e^{i theta}); the global phase drops out of every density matrix
    return np.array([[1, 0], [0, np.exp(1j * theta)]], dtype=complex)


def pauli_x() -> np.ndarray:
    return np.array([[0, 1], [1, 0]], dtype=complex)


def pauli_y() -> np.ndarray:
    return np.array([[0, -1j], [1j, 0]], dtype=complex)


def pauli_z() -> np.ndarray:
    return np.array([[1, 0], [0, -1]], dtype=complex)


def hadamard() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def cz() -> np.ndarray:
    return np.diag([1, 1, 1, -1]).astype(complex)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def ket(bits: str) -> np.ndarray:
    """Computational basis ket, e.g. ``ket("01")``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def equatorial_ket(delta: float) -> np.ndarray:
    """+1 eigenvector of cos(delta) X + sin(delta) Y (reported as outcome 0)."""
    return np.array([1, np.exp(1j * delta)], dtype=complex) / np.sqrt(2)


def equatorial_observable(delta: float) -> np.ndarray:
    return np.cos(delta) * pauli_x() + np.sin(delta) * pauli_y()


def is_unitary(u: np.ndarray, tol: float = 1e-12) -> bool:
    u = np.asarray(u)
    return bool(np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=tol, rtol=0))


def check_density(rho: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Validate ``rho`` as a density matrix and return it as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] not in (2, 4):
        raise InvalidStateError(f"expected a 2x2 or 4x4 matrix, got shape {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise InvalidStateError(f"expected dimension {dim}, got {rho.shape[0]}")
    if not np.all(np.isfinite(rho)):
        raise InvalidStateError("non-finite entries")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise InvalidStateError("matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > TRACE_TOL:
        raise InvalidStateError(f"trace {np.trace(rho).real:.15g} != 1")
    if np.linalg.eigvalsh(rho).min() < -EIG_TOL:
        raise InvalidStateError("matrix has a negative eigenvalue")
    return rho


def apply(u: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return u @ rho @ u.conj().T


def partial_trace(rho: np.ndarray, keep: int) -> np.ndarray:
    """Reduced state of qubit ``keep`` (1 or 2) of a two-qubit state."""
    if keep not in (1, 2):
        raise ValueError("keep must be 1 or 2")
    r = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    if keep == 1:
        return np.einsum("ajbj->ab", r)
    return np.einsum("jajb->ab", r)


def measure_equatorial(
    rho: np.ndarray, qubit: int, delta: float, rng: UniformSource
) -> tuple[int, np.ndarray, float]:
    """Projective measurement of M(delta) on one qubit.

    For a two-qubit ``rho`` the returned post-state is the normalized state of
    the other qubit. For a single-qubit ``rho`` ``qubit`` must be 1 and the
    post-state is the projected eigenstate itself.
    """
    rho = np.asarray(rho, dtype=complex)
    e0 = equatorial_ket(delta)
    e1 = equatorial_ket(delta + np.pi)
    if rho.shape == (2, 2):
        if qubit != 1:
            raise ValueError("single-qubit state only has qubit 1")
        p0 = float(np.real(e0.conj() @ rho @ e0))
        p1 = float(np.real(e1.conj() @ rho @ e1))
        posts = (projector(e0), projector(e1))
    else:
        if qubit not in (1, 2):
            raise ValueError("qubit must be 1 or 2")
        r = rho.reshape(2, 2, 2, 2)
        if qubit == 1:
            s0 = np.einsum("a,ajbk,b->jk", e0.conj(), r, e0)
            s1 = np.einsum("a,ajbk,b->jk", e1.conj(), r, e1)
        else:
            s0 = np.einsum("a,jakb,b->jk", e0.conj(), r, e0)
            s1 = np.einsum("a,jakb,b->jk", e1.conj(), r, e1)
        p0 = float(np.real(np.trace(s0)))
        p1 = float(np.real(np.trace(s1)))
        posts = (s0 / p0 if p0 > PROB_FLOOR else s0, s1 / p1 if p1 > PROB_FLOOR else s1)
    if p0 < PROB_FLOOR and p1 < PROB_FLOOR:
        raise RuntimeError("both measurement branches have zero probability")
    p0 = min(max(p0, 0.0), 1.0)
    outcome = 0 if rng.random() < p0 else 1
    if outcome == 1 and p1 < PROB_FLOOR:
        outcome = 0
    if outcome == 0 and p0 < PROB_FLOOR:
        outcome = 1
    prob = p0 if outcome == 0 else 1.0 - p0
    return outcome, posts[outcome], prob


def _sqrtm_psd(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    if w.min() < -EIG_TOL:
        raise InvalidStateError("matrix has a negative eigenvalue")
    w = np.clip(w, 0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    # a pure argument reduces to <psi|rho|psi>, which avoids sqrt of ~0 eigenvalues
    for pure, other in ((a, b), (b, a)):
        if abs(np.trace(pure @ pure).real - 1) < 1e-10:
            w, v = np.linalg.eigh(pure)
            if w.min() < -EIG_TOL or np.linalg.eigvalsh(other).min() < -EIG_TOL:
                raise InvalidStateError("matrix has a negative eigenvalue")
            psi = v[:, -1]
            return min(max(float(np.real(psi.conj() @ other @ psi)), 0.0), 1.0)
    sa = _sqrtm_psd(a)
    inner = sa @ b @ sa
    inner = (inner + inner.conj().T) / 2
    w = np.linalg.eigvalsh(inner)
    if w.min() < -EIG_TOL:
        raise InvalidStateError("matrix has a negative eigenvalue")
    f = float(np.sum(np.sqrt(np.clip(w, 0, None))) ** 2)
    return min(max(f, 0.0), 1.0)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy in bits."""
    w = np.linalg.eigvalsh(np.asarray(rho, dtype=complex))
    if w.min() < -EIG_TOL:
        raise InvalidStateError(f"eigenvalue {w.min():.3g} below tolerance")
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w)))


def holevo(ensemble: Sequence[tuple[float, np.ndarray]]) -> float:
    """Holevo quantity S(sum p_i rho_i) - sum p_i S(rho_i), in bits."""
    if not ensemble:
        raise ValueError("empty ensemble")
    probs = np.array([p for p, _ in ensemble], dtype=float)
    if np.any(probs < 0) or np.any(probs > 1):
        raise ValueError("probabilities must lie in [0, 1]")
    if abs(probs.sum() - 1) > 1e-9:
        raise ValueError(f"probabilities sum to {probs.sum()}, not 1")
    states = [np.asarray(r, dtype=complex) for _, r in ensemble]
    avg = sum(p * r for p, r in zip(probs, states))
    chi = von_neumann_entropy(avg) - sum(p * von_neumann_entropy(r) for p, r in zip(probs, states))
    if -EIG_TOL < chi <= 0:
        chi = 0.0
    return float(chi)
