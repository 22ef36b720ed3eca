"""
Closed-form CAZAC families: quadratic phase (Zadoff-Chu, P4, Wiener) and Bjorck.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .seqcore import UnitSequence

__all__ = [
    "NotOddPrime",
    "InvalidSpec",
    "QuadraticPhaseSpec",
    "is_prime",
    "legendre",
    "legendre_table",
    "quadratic_phase",
    "zadoff_chu",
    "p4",
    "wiener",
    "wiener_parameters",
    "bjorck",
    "FAMILIES",
]

FAMILIES = ("zadoff-chu", "p4", "wiener")


class NotOddPrime(ValueError):
    pass


class InvalidSpec(ValueError):
    pass


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def _require_odd_prime(p: int) -> None:
    if p % 2 == 0 or not is_prime(p):
        raise NotOddPrime(f"p={p} is not an odd prime")


def legendre(j: int, p: int) -> int:
    """Legendre symbol (j/p) in {-1, 0, 1} via Euler's criterion."""
    _require_odd_prime(p)
    j %= p
    if j == 0:
        return 0
    return 1 if pow(j, (p - 1) // 2, p) == 1 else -1


def legendre_table(p: int) -> np.ndarray:
    """Values of (j/p) for j = 0..p-1."""
    _require_odd_prime(p)
    table = -np.ones(p, dtype=int)
    table[0] = 0
    table[[(x * x) % p for x in range(1, p)]] = 1
    return table


@dataclass(frozen=True)
class QuadraticPhaseSpec:
    """
    Family tag plus length; `k` is the Wiener parameter and ignored otherwise.

    Wiener uses p(j) = 2kj^2 for odd n (gcd(k, n) = 1) and p(j) = kj^2 for
    even n (gcd(k, 2n) = 1).
    """

    family: str
    n: int
    k: int = 1

    def validate(self) -> None:
        fam, n, k = self.family, self.n, self.k
        if fam not in FAMILIES:
            raise InvalidSpec(f"unknown family {fam!r}; expected one of {FAMILIES}")
        if n < 1:
            raise InvalidSpec(f"n must be >= 1, got {n}")
        if fam == "zadoff-chu" and n % 2 == 0:
            raise InvalidSpec(f"zadoff-chu: n must be odd, got n={n}")
        if fam == "wiener":
            if n % 2 and math.gcd(k, n) != 1:
                raise InvalidSpec(f"wiener: odd n requires gcd(k, n) = 1, got k={k}, n={n}")
            if n % 2 == 0 and math.gcd(k, 2 * n) != 1:
                raise InvalidSpec(
                    f"wiener: even n requires gcd(k, 2n) = 1, got k={k}, n={n}"
                )

    def phase_polynomial(self, j: np.ndarray) -> np.ndarray:
        n, k = self.n, self.k
        if self.family == "zadoff-chu":
            return j * (j - 1)
        if self.family == "p4":
            return j * (j - n)
        if n % 2:
            return 2 * k * j * j
        return k * j * j


def _phase_from_integer(p_of_j: np.ndarray, n: int) -> np.ndarray:
    # exp(pi i p/n) depends only on p mod 2n; reduce before scaling to radians
    r = np.mod(p_of_j, 2 * n)
    return np.exp(1j * np.pi * r / n)


def quadratic_phase(spec: QuadraticPhaseSpec) -> UnitSequence:
    spec.validate()
    j = np.arange(spec.n, dtype=np.int64)
    return UnitSequence(_phase_from_integer(spec.phase_polynomial(j), spec.n))


def zadoff_chu(n: int) -> UnitSequence:
    return quadratic_phase(QuadraticPhaseSpec("zadoff-chu", n))


def p4(n: int) -> UnitSequence:
    return quadratic_phase(QuadraticPhaseSpec("p4", n))


def wiener(n: int, k: int = 1) -> UnitSequence:
    return quadratic_phase(QuadraticPhaseSpec("wiener", n, k))


def wiener_parameters(n: int) -> list:
    """Valid Wiener k, one per distinct sequence (k mod n odd, k mod 2n even)."""
    if n % 2:
        return [k for k in range(1, n) if math.gcd(k, n) == 1] if n > 1 else [1]
    return [k for k in range(1, 2 * n) if math.gcd(k, 2 * n) == 1]


def bjorck(p: int) -> UnitSequence:
    """
    Bjorck sequence of odd prime length `p`.

    For p = 1 mod 4 the phase is (j/p) arccos(1/(1+sqrt p)); for p = 3 mod 4
    it is arccos((1-p)/(1+p)) on quadratic non-residues and 0 elsewhere.
    """
    _require_odd_prime(p)
    leg = legendre_table(p)
    if p % 4 == 1:
        theta = leg * math.acos(1.0 / (1.0 + math.sqrt(p)))
    else:
        theta = np.where(leg == -1, math.acos((1.0 - p) / (1.0 + p)), 0.0)
    x = np.exp(1j * theta)
    x[theta == 0] = 1.0
    return UnitSequence(x)
