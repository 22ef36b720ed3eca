"""
Translation, modulation, coprime decimation and conjugation of sequences;
orbit closure under the group they generate; dedupe by canonical key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .seqcore import canonicalize, key_of

__all__ = [
    "BadDecimation",
    "Transform",
    "OrbitReport",
    "translate",
    "modulate",
    "decimate",
    "conjugate",
    "generators",
    "apply",
    "compose",
    "orbit",
    "orbit_keys",
    "dedupe",
]

KINDS = ("translate", "modulate", "decimate", "conjugate")


class BadDecimation(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Transform:
    kind: str
    param: int = 0

    def reduced(self, n: int) -> "Transform":
        if self.kind == "conjugate":
            return Transform("conjugate", 0)
        p = self.param % n
        if self.kind == "decimate" and math.gcd(p, n) != 1:
            raise BadDecimation(f"decimation m={self.param} is not coprime to n={n}")
        return Transform(self.kind, p)

    def __str__(self):
        if self.kind == "conjugate":
            return "C"
        return f"{self.kind[0].upper()}{self.param}"


def translate(k: int) -> Transform:
    return Transform("translate", k)


def modulate(l: int) -> Transform:
    return Transform("modulate", l)


def decimate(m: int) -> Transform:
    return Transform("decimate", m)


def conjugate() -> Transform:
    return Transform("conjugate", 0)


def generators(n: int) -> list:
    """Every non-identity single transform for length n, in a fixed order."""
    out = [translate(k) for k in range(1, n)]
    out += [modulate(l) for l in range(1, n)]
    out += [decimate(m) for m in range(2, n) if math.gcd(m, n) == 1]
    out.append(conjugate())
    return out


def apply(t: Transform, x) -> np.ndarray:
    x = np.asarray(x, dtype=complex).reshape(-1)
    n = x.size
    t = t.reduced(n)
    j = np.arange(n)
    if t.kind == "translate":
        return x[(j + t.param) % n]
    if t.kind == "modulate":
        # omega^{l j} with the exponent reduced mod n before evaluation
        return np.exp(2j * np.pi * ((t.param * j) % n) / n) * x
    if t.kind == "decimate":
        return x[(t.param * j) % n]
    if t.kind == "conjugate":
        return np.conj(x)
    raise ValueError(f"unknown transform kind {t.kind!r}")


def compose(first: Transform, second: Transform, n: int):
    """
    Parameter-level composition ``second . first`` where a closed form
    exists (same-kind translate, modulate, decimate; conjugate twice).
    Returns None otherwise.
    """
    a, b = first.reduced(n), second.reduced(n)
    if a.kind != b.kind:
        return None
    if a.kind in ("translate", "modulate"):
        return Transform(a.kind, (a.param + b.param) % n)
    if a.kind == "decimate":
        return Transform("decimate", (a.param * b.param) % n)
    return Transform("translate", 0)  # conjugation is an involution


@dataclass
class OrbitReport:
    base: np.ndarray
    keys: list
    members: list
    words: dict = field(repr=False)
    sweeps: int = 0

    @property
    def count(self) -> int:
        return len(self.keys)


def orbit(x, max_word_len: int = 8, transforms=None) -> OrbitReport:
    """
    Breadth-first closure of canonical representatives under single
    transforms, until a sweep adds nothing or `max_word_len` sweeps ran.

    `transforms` restricts the generating set (default: all of
    :func:`generators`).
    """
    if max_word_len < 1:
        raise ValueError("max_word_len must be >= 1")
    base = canonicalize(x)
    n = base.size
    gens = generators(n) if transforms is None else [t.reduced(n) for t in transforms]
    k0 = key_of(base)
    seen = {k0: base}
    words = {k0: ()}
    frontier = [k0]
    sweeps = 0
    while frontier and sweeps < max_word_len:
        sweeps += 1
        fresh = {}
        for k in frontier:
            y = seen[k]
            for t in gens:
                z = canonicalize(apply(t, y))
                kz = key_of(z)
                if kz in seen or kz in fresh:
                    continue
                fresh[kz] = z
                words[kz] = words[k] + (t,)
        seen.update(fresh)
        frontier = sorted(fresh)
    keys = sorted(seen)
    return OrbitReport(base, keys, [seen[k] for k in keys], words, sweeps)


def orbit_keys(xs, max_word_len: int = 8) -> set:
    out = set()
    for x in xs:
        if key_of(x) in out:
            continue
        out.update(orbit(x, max_word_len).keys)
    return out


def dedupe(xs) -> list:
    """One canonical representative per key (first occurrence), sorted by key."""
    first = {}
    for x in xs:
        y = canonicalize(x)
        first.setdefault(key_of(y), y)
    return [first[k] for k in sorted(first)]
