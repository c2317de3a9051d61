"""Accept/abort decision, majority vote and concentration bounds."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np


class DegenerateVoteError(ValueError):
    """Exact tie in the majority vote."""


def sigma_threshold(k: int, p: float) -> float:
    """Largest tolerated failure fraction that keeps the protocol secure."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    if not 0.0 <= p < 0.5:
        raise ValueError("p must lie in [0, 1/2)")
    return (1.0 / k) * (2 * p - 1) / (2 * p - 2)


@dataclass(frozen=True)
class Thresholds:
    omega: float = 0.18
    nu: float = 0.14
    k: int = 2
    p: float = 0.0

    @property
    def sigma(self) -> float:
        return sigma_threshold(self.k, self.p)

    def validate(self) -> "Thresholds":
        s = self.sigma
        if not 0.0 <= self.nu <= self.omega:
            raise ValueError(f"need 0 <= nu <= omega, got nu={self.nu}, omega={self.omega}")
        if not self.omega < s <= 1.0:
            raise ValueError(f"need omega < sigma <= 1, got omega={self.omega}, sigma={s}")
        return self


@dataclass(frozen=True)
class VerdictStats:
    n: int
    n_test: int
    n_comp: int
    failed_tests: int
    epsilon: float
    omega: float
    majority_fraction: float | None


@dataclass(frozen=True)
class Verdict:
    accept: bool
    output: int | None
    stats: VerdictStats

    @property
    def name(self) -> str:
        return "accept" if self.accept else "abort"

    def to_dict(self) -> dict:
        return {"verdict": self.name, "output": self.output, **asdict(self.stats)}


def _columns(t):
    if hasattr(t, "columns"):
        return np.asarray(t.is_test, dtype=bool), np.asarray(t.m1_true), np.asarray(t.m2_true)
    recs = list(t)
    is_test = np.array([r.round_type.value == "test" for r in recs], dtype=bool)
    return is_test, np.array([r.m1_true for r in recs]), np.array([r.m2_true for r in recs])


def test_error_fraction(t) -> float:
    """Fraction of test rounds whose corrected outcomes differ."""
    is_test, m1, m2 = _columns(t)
    n_test = int(is_test.sum())
    if n_test == 0:
        raise ValueError("transcript has no test rounds")
    return int(np.sum((m1 ^ m2)[is_test])) / n_test


test_error_fraction.__test__ = False  # not a pytest test despite the name


def majority_vote(records: Iterable) -> tuple[int, float]:
    """Modal m2_true and its empirical fraction.

    Accepts RoundRecords or plain output bits.
    """
    bits = np.array([getattr(r, "m2_true", r) for r in records], dtype=np.int64)
    if bits.size == 0:
        raise ValueError("no computation rounds to vote on")
    ones = int(bits.sum())
    zeros = bits.size - ones
    if ones == zeros:
        raise DegenerateVoteError(f"tie: {zeros} zeros vs {ones} ones")
    out = int(ones > zeros)
    return out, max(ones, zeros) / bits.size


def decide(t, th: Thresholds) -> Verdict:
    th.validate()
    is_test, m1, m2 = _columns(t)
    n_test = int(is_test.sum())
    n_comp = int((~is_test).sum())
    if n_test == 0 or n_comp == 0:
        raise ValueError(f"need test and computation rounds, got {n_test} and {n_comp}")
    failed = int(np.sum((m1 ^ m2)[is_test]))
    eps = failed / n_test
    output, frac = None, None
    accept = eps <= th.omega
    if accept:
        output, frac = majority_vote(m2[~is_test])
    stats = VerdictStats(n=int(is_test.size), n_test=n_test, n_comp=n_comp, failed_tests=failed,
                         epsilon=eps, omega=th.omega, majority_fraction=frac)
    return Verdict(accept=accept, output=output, stats=stats)


# Generic Hoeffding tail bounds. They stand in for the protocol-specific
# robustness/soundness expressions, which are not reproduced here.


def robustness_bound(n_test: int, omega: float, nu: float) -> float:
    """Generic bound on P(abort) for hardware failing tests at rate <= nu."""
    if n_test < 1:
        raise ValueError("n_test must be >= 1")
    if omega <= nu:
        raise ValueError("robustness bound needs omega > nu")
    return math.exp(-2 * n_test * (omega - nu) ** 2)


def soundness_bound(n_test: int, sigma: float, omega: float) -> float:
    """Generic bound on P(accept) for a deviation failing tests at rate >= sigma."""
    if n_test < 1:
        raise ValueError("n_test must be >= 1")
    if omega >= sigma:
        raise ValueError("soundness bound needs omega < sigma")
    return math.exp(-2 * n_test * (sigma - omega) ** 2)
