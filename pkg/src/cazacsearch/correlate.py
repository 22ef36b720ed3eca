"""
Periodic and aperiodic ambiguity functions, autocorrelations, PSL and ISL.

Grids are indexed ``grid[k, l]`` with k the time shift and l the frequency
shift. The FFT path is the default; ``method="direct"`` evaluates the
defining sums and is kept as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TextIO

import numpy as np

__all__ = [
    "AmbiguityGrid",
    "SidelobeMetrics",
    "periodic_autocorrelation",
    "periodic_ambiguity",
    "aperiodic_autocorrelation",
    "aperiodic_ambiguity",
    "sidelobe_metrics",
    "write_grid",
    "read_grid",
]


@dataclass(frozen=True)
class AmbiguityGrid:
    kind: str  # "periodic" (1/n factor) or "aperiodic" (no factor)
    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def normalized_magnitude(self) -> np.ndarray:
        return np.abs(self.values) / abs(self.values[0, 0])

    def max_off_origin(self) -> float:
        """Largest normalized magnitude outside (k, l) = (0, 0)."""
        mag = self.normalized_magnitude().copy()
        mag[0, 0] = 0.0
        return float(mag.max()) if mag.size > 1 else 0.0


@dataclass(frozen=True)
class SidelobeMetrics:
    psl: float
    isl: float


def _seq(x) -> np.ndarray:
    return np.asarray(x, dtype=complex).reshape(-1)


def _check_method(method):
    if method not in ("fft", "direct"):
        raise ValueError(f"method must be 'fft' or 'direct', got {method!r}")


def _periodic_lag_products(x):
    # row k holds x_{j+k} conj(x_j), j = 0..n-1, indices mod n
    n = x.size
    idx = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    return x[idx] * np.conj(x)[None, :]


def _aperiodic_lag_products(x):
    # row k holds x_{j+k} conj(x_j) for j + k <= n-1, zero beyond
    n = x.size
    jk = np.arange(n)[:, None] + np.arange(n)[None, :]
    inside = jk < n
    prod = np.zeros((n, n), dtype=complex)
    rows, cols = np.nonzero(inside)
    prod[rows, cols] = x[jk[rows, cols]] * np.conj(x[cols])
    return prod


def _direct_dft_rows(prod):
    n = prod.shape[1]
    jl = np.outer(np.arange(n), np.arange(n)) % n
    kernel = np.exp(-2j * np.pi * jl / n)
    return prod @ kernel


def periodic_autocorrelation(x, method: str = "fft") -> np.ndarray:
    _check_method(method)
    x = _seq(x)
    n = x.size
    if method == "direct":
        return _periodic_lag_products(x).sum(axis=1) / n
    spec = np.fft.fft(x)
    return np.fft.ifft(np.abs(spec) ** 2) / n


def periodic_ambiguity(x, method: str = "fft") -> AmbiguityGrid:
    _check_method(method)
    x = _seq(x)
    prod = _periodic_lag_products(x)
    if method == "direct":
        values = _direct_dft_rows(prod) / x.size
    else:
        values = np.fft.fft(prod, axis=1) / x.size
    return AmbiguityGrid("periodic", values)


def aperiodic_autocorrelation(x, method: str = "fft") -> np.ndarray:
    """Lags k = 0..n-1 of sum_j x_{j+k} conj(x_j) with zero extension."""
    _check_method(method)
    x = _seq(x)
    n = x.size
    if method == "direct":
        # np.correlate(a, v)[k] = sum_m a[m+k] conj(v[m]); lag 0 sits at n-1
        return np.correlate(x, x, mode="full")[n - 1:]
    spec = np.fft.fft(x, 2 * n)
    return np.fft.ifft(np.abs(spec) ** 2)[:n]


def aperiodic_ambiguity(x, method: str = "fft") -> AmbiguityGrid:
    _check_method(method)
    x = _seq(x)
    prod = _aperiodic_lag_products(x)
    if method == "direct":
        values = _direct_dft_rows(prod)
    else:
        values = np.fft.fft(prod, axis=1)
    return AmbiguityGrid("aperiodic", values)


def sidelobe_metrics(x) -> SidelobeMetrics:
    """
    Peak and integrated sidelobe levels of the aperiodic autocorrelation,
    both normalized by the zero-lag value.
    """
    x = _seq(x)
    if x.size < 2:
        raise ValueError("sidelobe metrics need n >= 2")
    mag = np.abs(aperiodic_autocorrelation(x, method="direct"))
    peak = mag[0]
    side = mag[1:]
    return SidelobeMetrics(float(side.max() / peak), float(np.sum(side**2) / peak**2))


def write_grid(fh: TextIO, grid: AmbiguityGrid) -> None:
    """Header ``n=<n>,kind=<kind>`` then n rows of normalized magnitudes."""
    fh.write(f"n={grid.n},kind={grid.kind}\n")
    for row in grid.normalized_magnitude():
        fh.write(",".join(f"{v:.9g}" for v in row) + "\n")


def read_grid(fh: TextIO):
    """Return (kind, magnitudes) from a file written by :func:`write_grid`."""
    header = fh.readline().strip()
    fields = dict(part.split("=", 1) for part in header.split(","))
    n = int(fields["n"])
    rows = [list(map(float, line.split(","))) for line in fh if line.strip()]
    mag = np.array(rows, dtype=float)
    if mag.shape != (n, n):
        raise ValueError(f"grid shape {mag.shape} does not match n={n}")
    return fields["kind"], mag
