"""Hot numeric kernels with optional numba acceleration.

The functions here are written as plain numpy/python loops so the same
source compiles under ``numba.njit`` and also runs unmodified as the pure
numpy fallback.  The backend is chosen once at import time: numba is used
when importable unless the environment variable ``RFI_QKD_NO_NUMBA`` is set
to a truthy value (``1``, ``true``, ``yes``).

``benchmarks/bench_kernels.py`` compares the two paths.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "NUMBA_ENABLED",
    "entropy_bits",
    "project_box_simplex",
    "grouped_entropy_gap",
    "max_entropy_gap_ball",
]


def entropy_bits(p):
    """Shannon entropy of a nonnegative vector, in bits, 0*log(0) = 0."""
    s = 0.0
    for i in range(p.shape[0]):
        if p[i] > 0.0:
            s -= p[i] * np.log2(p[i])
    return s


def project_box_simplex(v, lo, hi, out):
    """Euclidean projection of v onto {x : lo <= x <= hi, sum(x) = 1}.

    Solved by bisection on the shift multiplier of the clipped solution
    x_i = clip(v_i + t, lo_i, hi_i).  Assumes sum(lo) <= 1 <= sum(hi).
    """
    n = v.shape[0]
    t_lo = 1e300
    t_hi = -1e300
    for i in range(n):
        a = lo[i] - v[i]
        b = hi[i] - v[i]
        if a < t_lo:
            t_lo = a
        if b > t_hi:
            t_hi = b
    for _ in range(100):
        t = 0.5 * (t_lo + t_hi)
        s = 0.0
        for i in range(n):
            x = v[i] + t
            if x < lo[i]:
                x = lo[i]
            elif x > hi[i]:
                x = hi[i]
            s += x
        if s < 1.0:
            t_lo = t
        else:
            t_hi = t
    t = 0.5 * (t_lo + t_hi)
    for i in range(n):
        x = v[i] + t
        if x < lo[i]:
            x = lo[i]
        elif x > hi[i]:
            x = hi[i]
        out[i] = x
    return out


def grouped_entropy_gap(x, n_groups, group_size):
    """H(x) - H(e) in bits for a flat vector split into contiguous groups.

    e_k = sum over group k; the gap is the entropy of the within-group label
    conditioned on the group, and is concave in x.  With a single group the
    gap reduces to H(x) itself.
    """
    h_x = entropy_bits(x)
    h_e = 0.0
    for k in range(n_groups):
        e = 0.0
        for l in range(group_size):
            e += x[k * group_size + l]
        if e > 0.0:
            h_e -= e * np.log2(e)
    return h_x - h_e


def max_entropy_gap_ball(lam, mu, n_groups, group_size, max_iter, tol):
    """Maximize grouped_entropy_gap over {x : |x - lam|_inf <= mu} n simplex.

    Projected gradient ascent with backtracking; the objective is concave,
    so the returned value is the global maximum (up to tol).  ``lam`` must
    be a valid distribution of length n_groups * group_size.
    """
    n = lam.shape[0]
    lo = np.empty(n)
    hi = np.empty(n)
    for i in range(n):
        a = lam[i] - mu
        lo[i] = a if a > 0.0 else 0.0
        b = lam[i] + mu
        hi[i] = b if b < 1.0 else 1.0
    x = lam.copy()
    xn = np.empty(n)
    g = np.empty(n)
    f = grouped_entropy_gap(x, n_groups, group_size)
    eta = 0.25
    stall = 0
    for _ in range(max_iter):
        # gradient of H(x) - H(e) is log2(e_k / x_i); clip to keep it finite
        for k in range(n_groups):
            e = 0.0
            for l in range(group_size):
                e += x[k * group_size + l]
            if e < 1e-18:
                e = 1e-18
            for l in range(group_size):
                xi = x[k * group_size + l]
                if xi < 1e-18:
                    xi = 1e-18
                g[k * group_size + l] = np.log2(e / xi)
        accepted = False
        fn = f
        for _ in range(60):
            for i in range(n):
                xn[i] = x[i] + eta * g[i]
            project_box_simplex(xn, lo, hi, xn)
            fn = grouped_entropy_gap(xn, n_groups, group_size)
            if fn >= f:
                accepted = True
                break
            eta *= 0.5
            if eta < 1e-18:
                break
        if not accepted:
            break
        gain = fn - f
        for i in range(n):
            x[i] = xn[i]
        f = fn
        eta *= 1.6
        if eta > 1e6:
            eta = 1e6
        if gain < tol:
            stall += 1
            if stall >= 8:
                break
        else:
            stall = 0
    return f


def _env_disabled() -> bool:
    return os.environ.get("RFI_QKD_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")


NUMBA_ENABLED = False
if not _env_disabled():
    try:
        import numba

        # Rebind in dependency order so jitted callers resolve jitted callees.
        entropy_bits = numba.njit(cache=True, nogil=True)(entropy_bits)
        project_box_simplex = numba.njit(cache=True, nogil=True)(project_box_simplex)
        grouped_entropy_gap = numba.njit(cache=True, nogil=True)(grouped_entropy_gap)
        max_entropy_gap_ball = numba.njit(cache=True, nogil=True)(max_entropy_gap_ball)
        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - exercised via RFI_QKD_NO_NUMBA instead
        pass
