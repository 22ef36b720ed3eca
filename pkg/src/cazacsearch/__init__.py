"""Search, enumerate and analyze CAZAC sequences by sum-of-squares minimization."""

__version__ = "0.1.0"

from .correlate import (  # noqa: E402
    aperiodic_ambiguity,
    aperiodic_autocorrelation,
    periodic_ambiguity,
    periodic_autocorrelation,
    sidelobe_metrics,
)
from .equiv import apply, dedupe, orbit  # noqa: E402
from .families import bjorck, legendre, p4, quadratic_phase, wiener, zadoff_chu  # noqa: E402
from .residual import ResidualSystem, jacobian, objective, residuals  # noqa: E402
from .search import SearchPlan, filter_known, finiteness_verdict, run_search  # noqa: E402
from .seqcore import canonicalize, embed, key_of, lift, verify_cazac  # noqa: E402
from .solver import SolverConfig, minimize  # noqa: E402
