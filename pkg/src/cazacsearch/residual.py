"""
Residuals of the real CAZAC system and their exact Jacobian.

For v = (a, b) of length 2n the residual vector has 3n-2 entries laid out as

    f_l = a_l^2 + b_l^2 - 1                          l = 0..n-1
    g_k = sum_j a_{j+k} a_j + b_{j+k} b_j             k = 1..n-1
    h_k = sum_j a_j b_{j+k} - b_j a_{j+k}             k = 1..n-1

with indices mod n, summed in the order j = 0..n-1. The objective is the
plain sum of squares (no 1/2 factor).
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

__all__ = ["ResidualSystem", "residuals", "objective", "jacobian"]


@numba.njit(cache=True, nogil=True)
def residuals_into(v, n, r):
    for l in range(n):
        r[l] = v[l] * v[l] + v[n + l] * v[n + l] - 1.0
    for k in range(1, n):
        g = 0.0
        h = 0.0
        for j in range(n):
            jk = (j + k) % n
            g += v[jk] * v[j] + v[n + jk] * v[n + j]
            h += v[j] * v[n + jk] - v[n + j] * v[jk]
        r[n + k - 1] = g
        r[2 * n + k - 2] = h


@numba.njit(cache=True, nogil=True)
def jacobian_into(v, n, J):
    for i in range(J.shape[0]):
        for c in range(J.shape[1]):
            J[i, c] = 0.0
    for l in range(n):
        J[l, l] = 2.0 * v[l]
        J[l, n + l] = 2.0 * v[n + l]
    for k in range(1, n):
        rg = n + k - 1
        rh = 2 * n + k - 2
        for m in range(n):
            p = (m + k) % n
            q = (m - k) % n
            J[rg, m] = v[p] + v[q]
            J[rg, n + m] = v[n + p] + v[n + q]
            J[rh, m] = v[n + p] - v[n + q]
            J[rh, n + m] = v[q] - v[p]


def _vector(v) -> np.ndarray:
    v = np.ascontiguousarray(v, dtype=np.float64).reshape(-1)
    if v.size < 4 or v.size % 2:
        raise ValueError(f"embedding must have even length 2n with n >= 2, got {v.size}")
    return v


def residuals(v) -> np.ndarray:
    v = _vector(v)
    n = v.size // 2
    r = np.empty(3 * n - 2)
    residuals_into(v, n, r)
    return r


def objective(v) -> float:
    r = residuals(v)
    return float(r @ r)


def jacobian(v) -> np.ndarray:
    """(3n-2) x 2n matrix; columns follow the embedding (a then b)."""
    v = _vector(v)
    n = v.size // 2
    J = np.empty((3 * n - 2, 2 * n))
    jacobian_into(v, n, J)
    return J


@dataclass(frozen=True)
class ResidualSystem:
    """The residual map for sequences of length `n`."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")

    @property
    def n_residuals(self) -> int:
        return 3 * self.n - 2

    @property
    def n_variables(self) -> int:
        return 2 * self.n

    def _check(self, v):
        v = _vector(v)
        if v.size != 2 * self.n:
            raise ValueError(f"expected {2 * self.n} variables, got {v.size}")
        return v

    def residuals(self, v) -> np.ndarray:
        return residuals(self._check(v))

    def objective(self, v) -> float:
        return objective(self._check(v))

    def jacobian(self, v) -> np.ndarray:
        return jacobian(self._check(v))
