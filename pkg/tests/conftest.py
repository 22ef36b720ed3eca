import numpy as np
import pytest

from cazacsearch.seqcore import canonicalize, lift
from cazacsearch.solver import SolverConfig, solve_batch


def random_unit(rng, n):
    return np.exp(2j * np.pi * rng.random(n))


def random_cazacs(n, count, seed=0):
    """Solver-found CAZAC sequences of length n (canonical, cost < 1e-10)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        starts = rng.uniform(-1, 1, (2 * count, 2 * n))
        res = solve_batch(n, starts, SolverConfig())
        for v, c in zip(res["points"], res["costs"]):
            if c < 1e-10 and len(out) < count:
                out.append(canonicalize(lift(v)))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
