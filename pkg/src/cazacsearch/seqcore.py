"""
Complex sequences, unit-modulus checks, canonical representatives and keys.

A sequence is a 1-D complex ndarray. Its real embedding is the float ndarray
``(a_0, ..., a_{n-1}, b_0, ..., b_{n-1})`` holding real then imaginary parts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

__all__ = [
    "ZeroLeadingEntry",
    "NotUnitModulus",
    "SequenceFormatError",
    "UnitSequence",
    "CanonicalKey",
    "CazacReport",
    "as_sequence",
    "embed",
    "lift",
    "canonicalize",
    "verify_cazac",
    "key_of",
    "format_record",
    "parse_record",
    "write_sequences",
    "read_sequences",
]

KEY_SCALE = 10**8
DEFAULT_MODULUS_TOL = 1e-8


class ZeroLeadingEntry(ValueError):
    pass


class NotUnitModulus(ValueError):
    pass


class SequenceFormatError(ValueError):
    pass


def as_sequence(x) -> np.ndarray:
    """Return a read-only 1-D complex copy of `x` (length >= 1)."""
    arr = np.array(x, dtype=complex).reshape(-1)
    if arr.size == 0:
        raise ValueError("sequence must have length >= 1")
    arr.setflags(write=False)
    return arr


class UnitSequence:
    """
    Immutable sequence whose entries all have modulus 1 within `modulus_tol`.

    Behaves like a read-only complex array through ``np.asarray``.
    """

    __slots__ = ("_x", "modulus_tol")

    def __init__(self, x, modulus_tol: float = DEFAULT_MODULUS_TOL):
        arr = as_sequence(x)
        err = float(np.max(np.abs(np.abs(arr) - 1.0)))
        if err > modulus_tol:
            raise NotUnitModulus(
                f"max | |x_j| - 1 | = {err:.3e} exceeds modulus_tol={modulus_tol:g}"
            )
        self._x = arr
        self.modulus_tol = modulus_tol

    @property
    def entries(self) -> np.ndarray:
        return self._x

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._x
        return self._x.astype(dtype)

    def __len__(self):
        return self._x.size

    def __getitem__(self, j):
        return self._x[j]

    def __iter__(self):
        return iter(self._x)

    def __eq__(self, other):
        if not isinstance(other, UnitSequence):
            return NotImplemented
        return np.array_equal(self._x, other._x)

    def __hash__(self):
        return hash(self._x.tobytes())

    def __repr__(self):
        return f"UnitSequence({np.array2string(self._x, precision=6)})"


@dataclass(frozen=True, order=True)
class CanonicalKey:
    """Fixed-point fingerprint: 2n integers round(value * 1e8), reals first."""

    digits: tuple

    @property
    def n(self) -> int:
        return len(self.digits) // 2


@dataclass(frozen=True)
class CazacReport:
    max_modulus_error: float
    max_autocorrelation: float
    passed: bool

    def __bool__(self):
        return self.passed


def embed(x) -> np.ndarray:
    """Complex length-n sequence -> real length-2n vector (a then b)."""
    x = np.asarray(x, dtype=complex).reshape(-1)
    return np.concatenate([x.real, x.imag])


def lift(v) -> np.ndarray:
    """Real length-2n vector (a then b) -> complex length-n sequence."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size % 2:
        raise ValueError(f"embedding length {v.size} is odd")
    n = v.size // 2
    x = np.empty(n, dtype=complex)
    x.real = v[:n]
    x.imag = v[n:]
    return x


def canonicalize(x) -> np.ndarray:
    """
    Divide by the first entry so the representative starts with exactly 1.

    Raises
    ------
    ZeroLeadingEntry
        If ``|x_0| < 1e-12``.
    """
    x = np.asarray(x, dtype=complex).reshape(-1)
    if abs(x[0]) < 1e-12:
        raise ZeroLeadingEntry(f"|x_0| = {abs(x[0]):.3e} is too small to divide by")
    y = x / x[0]
    y[0] = 1.0
    return y


def _periodic_lags(x: np.ndarray) -> np.ndarray:
    # direct O(n^2) sums; avoids importing correlate here
    n = x.size
    idx = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    return (x[idx] * np.conj(x)[None, :]).sum(axis=1) / n


def verify_cazac(x, tol: float = 1e-8) -> CazacReport:
    """Check unit modulus and vanishing periodic autocorrelation off zero lag."""
    x = np.asarray(x, dtype=complex).reshape(-1)
    mod_err = float(np.max(np.abs(np.abs(x) - 1.0)))
    if x.size == 1:
        max_ac = 0.0
    else:
        max_ac = float(np.max(np.abs(_periodic_lags(x)[1:])))
    return CazacReport(mod_err, max_ac, mod_err <= tol and max_ac <= tol)


def _round_half_away(values: np.ndarray) -> np.ndarray:
    scaled = values * KEY_SCALE
    return (np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)).astype(np.int64)


def key_of(x) -> CanonicalKey:
    """Key of the canonical representative of `x`, rounded to 8 decimals."""
    y = canonicalize(x)
    digits = _round_half_away(np.concatenate([y.real, y.imag]))
    return CanonicalKey(tuple(int(d) for d in digits))


# --- serialization: one record per line, 2n reals, 17 significant digits ---

def format_record(x) -> str:
    return ",".join(f"{v:.17g}" for v in embed(x))


def parse_record(line: str) -> np.ndarray:
    fields = [f for f in line.replace(",", " ").split()]
    if not fields or len(fields) % 2:
        raise SequenceFormatError(
            f"record needs an even, nonzero number of values, got {len(fields)}"
        )
    try:
        v = np.array([float(f) for f in fields])
    except ValueError as exc:
        raise SequenceFormatError(str(exc)) from None
    if not np.all(np.isfinite(v)):
        raise SequenceFormatError("record contains non-finite values")
    return lift(v)


def write_sequences(fh: TextIO, xs: Iterable, comments: Iterable[str] = ()) -> None:
    for c in comments:
        fh.write(f"# {c}\n")
    for x in xs:
        fh.write(format_record(x) + "\n")


def read_sequences(fh: TextIO) -> list:
    """Parse a sequence file; blank lines and '#' lines are skipped."""
    out = []
    for lineno, line in enumerate(fh, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            out.append(parse_record(line))
        except SequenceFormatError as exc:
            raise SequenceFormatError(f"line {lineno}: {exc}") from None
    return out
