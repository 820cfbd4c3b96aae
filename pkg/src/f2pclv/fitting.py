"""Shared maximum-likelihood driver: Nelder-Mead over log-parameters.

Parameters are optimized as logs so positivity holds by construction. The
simplex search restarts from jittered initial points and stops early once
additional restarts stop improving the incumbent optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

SIMPLEX_XATOL = 1e-8
SIMPLEX_FATOL = 1e-10
MAX_EVALS = 10_000
DEFAULT_RESTARTS = 5
_JITTER = 0.3
_EARLY_STOP = 1e-4


@dataclass
class MultistartResult:
    x: np.ndarray
    fun: float
    n_evals: int
    n_starts: int
    converged: bool


def minimize_multistart(
    objective,
    x0_log: np.ndarray,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    max_evals: int = MAX_EVALS,
) -> MultistartResult:
    """Minimize over log-parameters from up to `restarts` jittered starts.

    Restart k = 0 uses x0_log as-is. After two consecutive restarts fail to
    improve the best objective by more than a small threshold the remaining
    restarts are skipped.
    """
    rng = np.random.default_rng(seed)
    x0_log = np.asarray(x0_log, dtype=float)

    def safe_objective(theta):
        val = objective(theta)
        return val if np.isfinite(val) else np.inf

    best = None
    best_converged = False
    total_evals = 0
    stale = 0
    starts = 0
    for k in range(restarts):
        start = x0_log if k == 0 else x0_log + rng.normal(0.0, _JITTER, x0_log.shape)
        res = minimize(
            safe_objective,
            start,
            method="Nelder-Mead",
            options={
                "xatol": SIMPLEX_XATOL,
                "fatol": SIMPLEX_FATOL,
                "maxfev": max_evals,
                "maxiter": max_evals,
            },
        )
        total_evals += res.nfev
        starts += 1
        if best is None or res.fun < best.fun - _EARLY_STOP:
            if best is None or np.isfinite(res.fun):
                best = res
                best_converged = bool(res.success)
            stale = 0
        else:
            stale += 1
            if stale >= 2:
                break
    return MultistartResult(
        x=np.asarray(best.x, dtype=float),
        fun=float(best.fun),
        n_evals=total_evals,
        n_starts=starts,
        converged=bool(best_converged and np.isfinite(best.fun)),
    )
