"""
Randomized multi-start search for CAZAC sequences of a fixed length.

Trial ``i`` of a plan with seed ``s`` draws its start from a Philox stream
keyed by ``s`` with counter word ``i``, so every trial is reproducible on its
own and results never depend on how trials are scheduled across workers.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .equiv import orbit
from .families import bjorck, is_prime, wiener, wiener_parameters
from .residual import jacobian
from .seqcore import canonicalize, embed, key_of, lift, verify_cazac
from .solver import SolverConfig, solve_batch

__all__ = [
    "InsufficientData",
    "SearchPlan",
    "SearchReport",
    "FinitenessVerdict",
    "KnownPartition",
    "trial_start",
    "default_checkpoints",
    "run_search",
    "collect_solutions",
    "local_nullity",
    "finiteness_verdict",
    "filter_known",
    "known_keys",
]

log = logging.getLogger(__name__)

CHUNK = 256
NEAR_MISS_COST = 1e-8
VERIFY_TOL = 1e-8
RANK_TOL = 1e-6


class InsufficientData(ValueError):
    pass


def default_checkpoints(trials: int, count: int = 20) -> tuple:
    pts = {max(1, round(trials * i / count)) for i in range(1, count + 1)}
    return tuple(sorted(pts))


@dataclass(frozen=True)
class SearchPlan:
    n: int
    trials: int
    seed: int
    solver: SolverConfig = field(default_factory=SolverConfig)
    checkpoints: tuple = ()

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if not self.checkpoints:
            object.__setattr__(self, "checkpoints", default_checkpoints(self.trials))
        cps = tuple(int(c) for c in self.checkpoints)
        if list(cps) != sorted(cps) or cps[-1] > self.trials or cps[0] < 1:
            raise ValueError("checkpoints must be ascending and lie in [1, trials]")
        object.__setattr__(self, "checkpoints", cps)


@dataclass
class SearchReport:
    n: int
    seed: int
    trials: int
    solutions: list
    first_hit: list
    hits: list
    nullity: list
    converged: int
    non_converged: int
    near_misses: int
    linalg_failures: int
    max_accepted_cost: float
    min_accepted_cost: float
    growth_curve: list
    failure_cost_histogram: dict
    elapsed: float = 0.0

    @property
    def unique(self) -> int:
        return len(self.solutions)

    def to_dict(self) -> dict:
        """JSON-ready summary; elapsed time is left out so output is reproducible."""
        return {
            "n": self.n,
            "seed": self.seed,
            "trials": self.trials,
            "unique": self.unique,
            "converged": self.converged,
            "non_converged": self.non_converged,
            "near_misses": self.near_misses,
            "linalg_failures": self.linalg_failures,
            "max_accepted_cost": self.max_accepted_cost,
            "min_accepted_cost": self.min_accepted_cost,
            "growth_curve": [[c, u] for c, u in self.growth_curve],
            "failure_cost_histogram": self.failure_cost_histogram,
            "nullity_histogram": {
                str(k): v for k, v in sorted(_count(self.nullity).items())
            },
        }


def _count(values) -> dict:
    out = {}
    for v in values:
        out[v] = out.get(v, 0) + 1
    return out


def trial_start(seed: int, i: int, n: int) -> np.ndarray:
    """Uniform start in [-1, 1]^{2n} for trial `i`."""
    rng = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, i]))
    return rng.uniform(-1.0, 1.0, 2 * n)


def _solve_chunk(args):
    n, seed, lo, hi, cfg = args
    starts = np.stack([trial_start(seed, i, n) for i in range(lo, hi)])
    return lo, solve_batch(n, starts, cfg)


def _chunks(n, seed, lo, hi, cfg):
    for a in range(lo, hi, CHUNK):
        yield (n, seed, a, min(hi, a + CHUNK), cfg)


def local_nullity(x, rank_tol: float = RANK_TOL) -> int:
    """
    Numerical null-space dimension of the residual Jacobian at root `x`.

    Global phase rotation always contributes one; anything above one means
    the root is not isolated up to phase (or is a singular root).
    """
    s = np.linalg.svd(jacobian(embed(x)), compute_uv=False)
    return int(2 * len(x) - np.sum(s > rank_tol * s[0]))


class _Accumulator:
    def __init__(self, n, cfg):
        self.n = n
        self.cfg = cfg
        self.first = {}
        self.hits = {}
        self.converged = 0
        self.non_converged = 0
        self.near = 0
        self.linalg = 0
        self.accepted_costs = []
        self.failure_hist = {}

    def add(self, i, point, cost, ok):
        if not ok:
            self.linalg += 1
            self.non_converged += 1
            return
        if cost < self.cfg.acceptance_cost:
            x = canonicalize(lift(point))
            if verify_cazac(x, VERIFY_TOL):
                key = key_of(x)
                self.converged += 1
                self.accepted_costs.append(cost)
                if key not in self.first:
                    self.first[key] = (i, x)
                    self.hits[key] = 0
                self.hits[key] += 1
                return
        self.non_converged += 1
        if cost < NEAR_MISS_COST:
            self.near += 1
            log.info("trial %d: near miss at cost %.3e", i, cost)
        decade = int(math.floor(math.log10(cost))) if cost > 0 else -400
        self.failure_hist[decade] = self.failure_hist.get(decade, 0) + 1

    def report(self, seed, trials, checkpoints, elapsed):
        keys = sorted(self.first)
        firsts = np.array([self.first[k][0] for k in keys], dtype=np.int64)
        curve = [(c, int(np.sum(firsts < c))) for c in checkpoints]
        sols = [self.first[k][1] for k in keys]
        costs = self.accepted_costs
        return SearchReport(
            n=self.n,
            seed=seed,
            trials=trials,
            solutions=sols,
            first_hit=[int(f) for f in firsts],
            hits=[self.hits[k] for k in keys],
            nullity=[local_nullity(x) for x in sols],
            converged=self.converged,
            non_converged=self.non_converged,
            near_misses=self.near,
            linalg_failures=self.linalg,
            max_accepted_cost=float(max(costs)) if costs else float("nan"),
            min_accepted_cost=float(min(costs)) if costs else float("nan"),
            growth_curve=curve,
            failure_cost_histogram={
                f"1e{d}": c for d, c in sorted(self.failure_hist.items())
            },
            elapsed=elapsed,
        )


def _run_range(n, seed, lo, hi, cfg, workers, acc, stop=None):
    """Feed trials lo..hi-1 to `acc` in trial order; returns trials consumed."""
    jobs = _chunks(n, seed, lo, hi, cfg)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for start, out in pool.map(_solve_chunk, jobs):
            for t in range(out["costs"].size):
                acc.add(start + t, out["points"][t], float(out["costs"][t]), bool(out["ok"][t]))
                if stop is not None and stop(acc):
                    return start + t + 1
    return hi


def run_search(plan: SearchPlan, workers: int = 1) -> SearchReport:
    t0 = time.perf_counter()
    acc = _Accumulator(plan.n, plan.solver)
    _run_range(plan.n, plan.seed, 0, plan.trials, plan.solver, workers, acc)
    return acc.report(plan.seed, plan.trials, plan.checkpoints, time.perf_counter() - t0)


def collect_solutions(n: int, count: int, seed: int, cfg: SolverConfig | None = None,
                      workers: int = 1, max_trials: int = 1_000_000) -> SearchReport:
    """
    Run trials in order until `count` distinct solutions are found (or
    `max_trials` is exhausted); the report's trials field is the number used.
    """
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    acc = _Accumulator(n, cfg)
    done, lo = 0, 0
    batch = max(CHUNK, count)
    while lo < max_trials:
        hi = min(max_trials, lo + batch)
        done = _run_range(n, seed, lo, hi, cfg, workers, acc,
                          stop=lambda a: len(a.first) >= count)
        if len(acc.first) >= count:
            break
        lo = hi
    return acc.report(seed, done, default_checkpoints(done), time.perf_counter() - t0)


@dataclass(frozen=True)
class FinitenessVerdict:
    verdict: str  # likely-finite | likely-infinite | inconclusive
    tail_start: int
    tail_new: int
    tail_rate: float
    unique_ratio: float
    nonisolated_fraction: float
    thresholds: dict


def finiteness_verdict(report: SearchReport, tail_fraction: float = 0.25,
                       finite_ratio: float = 0.5, infinite_rate: float = 0.5,
                       nonisolated_fraction: float = 0.1) -> FinitenessVerdict:
    """
    Classify a growth curve.

    likely-finite
        no new keys over the final `tail_fraction` of trials, unique/trials
        below `finite_ratio`, and no more than `nonisolated_fraction` of the
        solutions with a Jacobian null space above the phase direction.
    likely-infinite
        the tail still adds keys, and either the tail rate exceeds
        `infinite_rate` new keys per trial or more than
        `nonisolated_fraction` of solutions lie on positive-dimensional
        pieces of the solution set.
    inconclusive
        anything else.
    """
    if report.trials < 100:
        raise InsufficientData(f"{report.trials} trials; need at least 100")
    curve = report.growth_curve
    if len(curve) < 2:
        raise InsufficientData("need at least 2 growth-curve checkpoints")
    cut = report.trials * (1.0 - tail_fraction)
    before = [(c, u) for c, u in curve if c <= cut]
    c0, u0 = before[-1] if before else (0, 0)
    c1, u1 = curve[-1]
    tail_new = u1 - u0
    tail_rate = tail_new / max(1, c1 - c0)
    ratio = report.unique / report.trials
    nonisolated = sum(1 for k in report.nullity if k > 1)
    frac = nonisolated / report.unique if report.unique else 0.0
    if tail_new == 0 and ratio < finite_ratio and frac <= nonisolated_fraction:
        verdict = "likely-finite"
    elif tail_new > 0 and (tail_rate > infinite_rate or frac > nonisolated_fraction):
        verdict = "likely-infinite"
    else:
        verdict = "inconclusive"
    return FinitenessVerdict(
        verdict=verdict,
        tail_start=int(c0),
        tail_new=int(tail_new),
        tail_rate=float(tail_rate),
        unique_ratio=float(ratio),
        nonisolated_fraction=float(frac),
        thresholds={
            "tail_fraction": tail_fraction,
            "finite_ratio": finite_ratio,
            "infinite_rate": infinite_rate,
            "nonisolated_fraction": nonisolated_fraction,
        },
    )


def known_keys(n: int, max_word_len: int = 8) -> dict:
    """Orbit keys of the Bjorck (prime n) and every Wiener sequence of length n."""
    bases = []
    if n > 2 and is_prime(n):
        bases.append(("bjorck", bjorck(n)))
    bases += [(f"wiener-k{k}", wiener(n, k)) for k in wiener_parameters(n)]
    labels = {}
    for name, base in bases:
        if key_of(base) in labels:
            continue
        for k in orbit(base, max_word_len).keys:
            labels.setdefault(k, name)
    return labels


@dataclass
class KnownPartition:
    known: list
    new: list
    labels: list  # provenance of each known entry, aligned with `known`


def filter_known(solutions, n: int, max_word_len: int = 8) -> KnownPartition:
    """Split `solutions` by membership in the orbits of the known families."""
    labels = known_keys(n, max_word_len)
    known, new, prov = [], [], []
    for x in solutions:
        if len(x) != n:
            raise ValueError(f"solution of length {len(x)} in a length-{n} filter")
        k = key_of(x)
        if k in labels:
            known.append(x)
            prov.append(labels[k])
        else:
            new.append(x)
    return KnownPartition(known, new, prov)
