"""
Levenberg-Marquardt minimization of the CAZAC residual system.

Each iteration solves ``(J^T J + lam * diag(J^T J)) step = -J^T r`` by Cholesky
and accepts the step only if it lowers the cost, shrinking lam on success and
growing it on failure. A run whose cost ends below ``acceptance_cost`` is then
polished: plain LM steps continue until no step lowers the cost, which puts
converged points at the floating-point floor so 8-decimal keys are stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .residual import ResidualSystem, jacobian_into, residuals_into

__all__ = [
    "LinearAlgebraFailure",
    "SolverConfig",
    "SolveOutcome",
    "minimize",
    "solve_batch",
    "REASONS",
]

REASONS = ("gradient", "step", "cost", "max_iter")

_DIAG_FLOOR = 1e-12
_LAM_MIN = 1e-15
_LAM_MAX = 1e300
_FACTOR_RETRIES = 20
_POLISH_RETRIES = 10


class LinearAlgebraFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    gradient_tol: float = 1e-12
    step_tol: float = 1e-12
    cost_tol: float = 1e-12
    max_iterations: int = 2000
    initial_damping: float = 1e-3
    damping_increase: float = 10.0
    damping_decrease: float = 0.1
    acceptance_cost: float = 1e-10
    polish_iterations: int = 20

    def __post_init__(self):
        for name in ("gradient_tol", "step_tol", "cost_tol", "initial_damping", "acceptance_cost"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if not self.damping_increase > 1:
            raise ValueError("damping_increase must be > 1")
        if not 0 < self.damping_decrease < 1:
            raise ValueError("damping_decrease must lie in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.polish_iterations < 0:
            raise ValueError("polish_iterations must be >= 0")

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class SolveOutcome:
    point: np.ndarray
    cost: float
    iterations: int
    reason: str
    converged: bool
    initial_cost: float
    polish_iterations: int = 0
    history: np.ndarray = field(default=None, repr=False)


@numba.njit(cache=True, nogil=True)
def _cholesky_solve(M, rhs, out, L):
    """Solve M out = rhs for symmetric M; False if M is not numerically PD."""
    d = M.shape[0]
    for i in range(d):
        for j in range(i + 1):
            s = M[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            if i == j:
                if not s > 0.0:
                    return False
                L[i, i] = np.sqrt(s)
            else:
                L[i, j] = s / L[j, j]
    for i in range(d):
        s = rhs[i]
        for k in range(i):
            s -= L[i, k] * out[k]
        out[i] = s / L[i, i]
    for i in range(d - 1, -1, -1):
        s = out[i]
        for k in range(i + 1, d):
            s -= L[k, i] * out[k]
        out[i] = s / L[i, i]
    for i in range(d):
        if not np.isfinite(out[i]):
            return False
    return True


@numba.njit(cache=True, nogil=True)
def _normal_equations(J, r, A, g):
    m, d = J.shape
    for i in range(d):
        s = 0.0
        for t in range(m):
            s += J[t, i] * r[t]
        g[i] = s
        for j in range(i + 1):
            s = 0.0
            for t in range(m):
                s += J[t, i] * J[t, j]
            A[i, j] = s
            A[j, i] = s


@numba.njit(cache=True, nogil=True)
def _norm(x):
    s = 0.0
    for i in range(x.size):
        s += x[i] * x[i]
    return np.sqrt(s)


@numba.njit(cache=True, nogil=True)
def _lm(v0, n, max_iter, lam0, up, down, gtol, xtol, ftol, accept_cost,
        polish_max, history):
    """
    Returns (v, cost, iterations, reason, polish_iterations, history_len, ok).
    ok is False when the damped system could not be factored.
    """
    m = 3 * n - 2
    d = 2 * n
    v = v0.copy()
    vt = np.empty(d)
    r = np.empty(m)
    rt = np.empty(m)
    J = np.empty((m, d))
    A = np.empty((d, d))
    M = np.empty((d, d))
    L = np.zeros((d, d))
    g = np.empty(d)
    neg_g = np.empty(d)
    diag = np.empty(d)
    step = np.empty(d)

    residuals_into(v, n, r)
    cost = 0.0
    for i in range(m):
        cost += r[i] * r[i]
    history[0] = cost
    lam = lam0
    it = 0
    reason = 3
    while it < max_iter:
        if np.sqrt(cost) <= ftol:
            reason = 2
            break
        jacobian_into(v, n, J)
        _normal_equations(J, r, A, g)
        gmax = 0.0
        for i in range(d):
            gmax = max(gmax, abs(g[i]))
            neg_g[i] = -g[i]
            diag[i] = max(A[i, i], _DIAG_FLOOR)
        if gmax <= gtol:
            reason = 0
            break
        stop = False
        fails = 0
        while True:
            for i in range(d):
                for j in range(d):
                    M[i, j] = A[i, j]
                M[i, i] += lam * diag[i]
            if not _cholesky_solve(M, neg_g, step, L):
                fails += 1
                if fails > _FACTOR_RETRIES:
                    return v, cost, it, reason, 0, it + 1, False
                lam *= up
                continue
            sn = _norm(step)
            vn = _norm(v)
            for i in range(d):
                vt[i] = v[i] + step[i]
            residuals_into(vt, n, rt)
            ct = 0.0
            for i in range(m):
                ct += rt[i] * rt[i]
            if ct < cost:
                dc = cost - ct
                old = cost
                v[:] = vt
                r[:] = rt
                cost = ct
                it += 1
                history[it] = cost
                lam = max(lam * down, _LAM_MIN)
                if dc <= ftol * old:
                    reason = 2
                    stop = True
                elif sn <= xtol * (vn + xtol):
                    reason = 1
                    stop = True
                break
            if sn <= xtol * (vn + xtol) or lam >= _LAM_MAX:
                reason = 1
                stop = True
                break
            lam *= up
        if stop:
            break
    hist_len = it + 1

    polished = 0
    if cost < accept_cost:
        while polished < polish_max and cost > 0.0:
            jacobian_into(v, n, J)
            _normal_equations(J, r, A, g)
            for i in range(d):
                neg_g[i] = -g[i]
                diag[i] = max(A[i, i], _DIAG_FLOOR)
            improved = False
            for _ in range(_POLISH_RETRIES):
                for i in range(d):
                    for j in range(d):
                        M[i, j] = A[i, j]
                    M[i, i] += lam * diag[i]
                if _cholesky_solve(M, neg_g, step, L):
                    for i in range(d):
                        vt[i] = v[i] + step[i]
                    residuals_into(vt, n, rt)
                    ct = 0.0
                    for i in range(m):
                        ct += rt[i] * rt[i]
                    if ct < cost:
                        v[:] = vt
                        r[:] = rt
                        cost = ct
                        lam = max(lam * down, _LAM_MIN)
                        improved = True
                        break
                lam *= up
            if not improved:
                break
            polished += 1
    return v, cost, it, reason, polished, hist_len, True


@numba.njit(cache=True, nogil=True)
def _lm_batch(starts, n, max_iter, lam0, up, down, gtol, xtol, ftol,
              accept_cost, polish_max, points, costs, iters, reasons, polished, ok):
    history = np.empty(max_iter + 1)
    for t in range(starts.shape[0]):
        v, c, it, why, pol, _, good = _lm(
            starts[t], n, max_iter, lam0, up, down, gtol, xtol, ftol,
            accept_cost, polish_max, history)
        points[t, :] = v
        costs[t] = c
        iters[t] = it
        reasons[t] = why
        polished[t] = pol
        ok[t] = good


def _kernel_args(cfg: SolverConfig):
    return (cfg.max_iterations, cfg.initial_damping, cfg.damping_increase,
            cfg.damping_decrease, cfg.gradient_tol, cfg.step_tol, cfg.cost_tol,
            cfg.acceptance_cost, cfg.polish_iterations)


def minimize(system: ResidualSystem, start, cfg: SolverConfig | None = None) -> SolveOutcome:
    """
    Drive ``system`` to a zero from ``start``.

    Raises
    ------
    LinearAlgebraFailure
        If the damped normal equations stay unfactorable after 20 increases
        of the damping parameter.
    """
    cfg = cfg or SolverConfig()
    v0 = np.ascontiguousarray(start, dtype=np.float64).reshape(-1)
    if v0.size != system.n_variables:
        raise ValueError(f"start has {v0.size} variables, system needs {system.n_variables}")
    if not np.all(np.isfinite(v0)):
        raise ValueError("start contains non-finite values")
    history = np.empty(cfg.max_iterations + 1)
    v, cost, it, why, pol, hlen, ok = _lm(v0, system.n, *_kernel_args(cfg), history)
    if not ok:
        raise LinearAlgebraFailure(
            f"damped normal equations singular after {_FACTOR_RETRIES} damping increases"
        )
    return SolveOutcome(
        point=v,
        cost=float(cost),
        iterations=int(it),
        reason=REASONS[why],
        converged=bool(cost < cfg.acceptance_cost),
        initial_cost=float(history[0]),
        polish_iterations=int(pol),
        history=history[:hlen].copy(),
    )


def solve_batch(n: int, starts: np.ndarray, cfg: SolverConfig):
    """
    Run :func:`minimize` on every row of `starts` inside one compiled loop.

    Returns a dict of arrays: points, costs, iterations, reasons, polished, ok.
    Rows with ``ok == False`` hit a factorization failure.
    """
    starts = np.ascontiguousarray(starts, dtype=np.float64)
    if not np.all(np.isfinite(starts)):
        raise ValueError("starts contain non-finite values")
    count = starts.shape[0]
    out = dict(
        points=np.empty((count, 2 * n)),
        costs=np.empty(count),
        iterations=np.empty(count, dtype=np.int64),
        reasons=np.empty(count, dtype=np.int64),
        polished=np.empty(count, dtype=np.int64),
        ok=np.empty(count, dtype=np.bool_),
    )
    _lm_batch(starts, n, *_kernel_args(cfg), out["points"], out["costs"],
              out["iterations"], out["reasons"], out["polished"], out["ok"])
    return out
