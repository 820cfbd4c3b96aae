"""Gauss hypergeometric function 2F1 for real arguments with z < 1.

The buy-till-you-die likelihoods evaluate 2F1 for every customer on every
optimizer step, with moderate parameters but arguments that can approach
the z = 1 singularity, so this is implemented as a vectorized power series
with a linear-space fast path, a signed log-space fallback for magnitudes
beyond double range, and the standard 1-z connection formula near the
singularity.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln, gammasgn

from .errors import NumericalError

SERIES_TOL = 1e-12
MAX_TERMS = 10_000

# Above this the direct series converges too slowly; switch to the 1-z
# connection formula.
_Z_SWITCH = 0.9

# Machine-relative stop for sums whose magnitude dwarfs the absolute
# tolerance.
_REL_STOP = 1e-16
_LOG_REL_STOP = np.log(_REL_STOP)


def _signed_logaddexp(log_x, sign_x, log_y, sign_y):
    """Accumulate y into x where both are (sign, log|value|) pairs."""
    same = sign_x * sign_y >= 0
    mag = np.logaddexp(log_x, log_y)
    hi = np.maximum(log_x, log_y)
    lo = np.minimum(log_x, log_y)
    with np.errstate(invalid="ignore", divide="ignore"):
        diff = hi + np.log1p(-np.exp(lo - hi))
    diff = np.where(lo == hi, -np.inf, diff)
    out_log = np.where(same, mag, diff)
    hi_sign = np.where(log_x >= log_y, sign_x, sign_y)
    out_sign = np.where(same, np.where(sign_x == 0, sign_y, sign_x), hi_sign)
    out_sign = np.where(np.isneginf(out_log), 0.0, out_sign)
    return out_log, out_sign


def _dither_nonpositive_integer(c):
    """Shift c off non-positive integers where the series would divide by 0."""
    near = (c <= 1e-9) & (np.abs(c - np.round(c)) < 1e-9)
    return np.where(near, c + 1e-9, c)


def _series_linear(a, b, c, z, tol, max_terms):
    """Direct power series in linear space.

    Returns (totals, ok) where ok marks rows that converged without
    overflowing.
    """
    c = _dither_nonpositive_integer(c)
    term = np.ones_like(z)
    total = np.ones_like(z)
    done = np.zeros(z.shape, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(max_terms):
            term = term * ((a + n) * (b + n)) / ((c + n) * (n + 1.0)) * z
            total = total + term
            # the convergence test costs as much as a term; amortize it
            if n % 4 == 3 or n == max_terms - 1:
                finite = np.isfinite(term) & np.isfinite(total)
                done = ~finite | (np.abs(term) < tol + _REL_STOP * np.abs(total))
                if done.all():
                    break
    ok = done & np.isfinite(term) & np.isfinite(total)
    return total, ok


def _series_log(a, b, c, z, tol, max_terms):
    """Direct power series accumulated as (sign, log|sum|) pairs."""
    c = _dither_nonpositive_integer(c)
    log_t = np.zeros_like(z)
    sign_t = np.ones_like(z)
    log_s = np.zeros_like(z)
    sign_s = np.ones_like(z)
    log_tol = np.log(tol)
    for n in range(max_terms):
        ratio = (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        with np.errstate(divide="ignore"):
            log_t = log_t + np.log(np.abs(ratio))
        sign_t = sign_t * np.sign(ratio)
        log_s, sign_s = _signed_logaddexp(log_s, sign_s, log_t, sign_t)
        if np.all((log_t < log_tol) | (log_t < log_s + _LOG_REL_STOP)):
            return log_s, sign_s
    raise NumericalError(
        "2F1 series did not converge within %d terms (max |z| = %.6g)"
        % (max_terms, float(np.max(np.abs(z))))
    )


def _log_gamma_ratio(tops, bottoms):
    """(sign, log) of prod Gamma(tops) / prod Gamma(bottoms)."""
    log = np.zeros_like(tops[0])
    sign = np.ones_like(tops[0])
    for t in tops:
        log = log + gammaln(t)
        sign = sign * gammasgn(t)
    for u in bottoms:
        log = log - gammaln(u)
        sign = sign * gammasgn(u)
    return log, sign


def _direct_log(a, b, c, z, tol, max_terms):
    total, ok = _series_linear(a, b, c, z, tol, max_terms)
    with np.errstate(divide="ignore"):
        log_f = np.where(ok, np.log(np.abs(total)), 0.0)
    sign_f = np.where(ok, np.sign(total), 1.0)
    if not ok.all():
        bad = ~ok
        log_b, sign_b = _series_log(a[bad], b[bad], c[bad], z[bad], tol, max_terms)
        log_f[bad] = log_b
        sign_f[bad] = sign_b
    return log_f, sign_f


def _connection_log(a, b, c, z, tol, max_terms):
    """2F1 near z = 1 via the two-series connection formula in w = 1 - z.

    Requires c - a - b away from an integer; values within 1e-6 of one are
    dithered, costing up to ~1e-6 relative accuracy at those points.
    """
    d = c - a - b
    near_int = np.abs(d - np.round(d)) < 1e-6
    c = np.where(near_int, c + 2e-6, c)
    d = c - a - b
    w = 1.0 - z

    log_g1, sign_g1 = _log_gamma_ratio((c, d), (c - a, c - b))
    log_f1, sign_f1 = _direct_log(a, b, a + b - c + 1.0, w, tol, max_terms)
    log_t1 = log_g1 + log_f1
    sign_t1 = sign_g1 * sign_f1

    log_g2, sign_g2 = _log_gamma_ratio((c, -d), (a, b))
    log_f2, sign_f2 = _direct_log(c - a, c - b, d + 1.0, w, tol, max_terms)
    log_t2 = log_g2 + log_f2 + d * np.log(w)
    sign_t2 = sign_g2 * sign_f2

    return _signed_logaddexp(log_t1, sign_t1, log_t2, sign_t2)


def log_hyp2f1(a, b, c, z, tol=SERIES_TOL, max_terms=MAX_TERMS):
    """(sign, log|2F1(a, b; c; z)|), vectorized over broadcast inputs.

    Supports real arguments with -0.9 <= z < 1; raises NumericalError if
    the series fails to converge and ValueError outside the domain.
    """
    scalar = all(np.ndim(v) == 0 for v in (a, b, c, z))
    a, b, c, z = np.broadcast_arrays(
        *(np.atleast_1d(np.asarray(v, dtype=float)) for v in (a, b, c, z))
    )
    a, b, c, z = (np.ascontiguousarray(v) for v in (a, b, c, z))
    if np.any(z >= 1.0) or np.any(z < -_Z_SWITCH):
        raise ValueError("2F1 evaluation requires -0.9 <= z < 1")

    log_f = np.zeros_like(z)
    sign_f = np.ones_like(z)
    near = z > _Z_SWITCH
    if np.any(~near):
        idx = ~near
        log_f[idx], sign_f[idx] = _direct_log(
            a[idx], b[idx], c[idx], z[idx], tol, max_terms
        )
    if np.any(near):
        log_f[near], sign_f[near] = _connection_log(
            a[near], b[near], c[near], z[near], tol, max_terms
        )
    if scalar:
        return float(sign_f[0]), float(log_f[0])
    return sign_f, log_f


def hyp2f1(a, b, c, z, tol=SERIES_TOL, max_terms=MAX_TERMS):
    """2F1(a, b; c; z) in linear space; overflows to +/-inf honestly."""
    sign, log_f = log_hyp2f1(a, b, c, z, tol=tol, max_terms=max_terms)
    with np.errstate(over="ignore"):
        return sign * np.exp(log_f)
