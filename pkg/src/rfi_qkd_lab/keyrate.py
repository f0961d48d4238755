"""Asymptotic and finite-size secret-key rates, by two techniques.

Both finite-key formulas multiply the kept fraction n/N into a bracket of
terms.  The direct (tomographic) bracket is

    min_{|lam' - lam|_inf <= mu} H(A|E)  -  leak_EC/n
        - (2/n) log2(1/eps_PA)  -  (2 log2 d + 3) sqrt(log2(2/eps_bar)/n)

with H(A|E) = log2 d - H(lam) + H(e_Z) for a Bell-diagonal spectrum lam and
its Z-error marginal e_Z.  The uncertainty-relation bracket replaces the
minimization by log2 d - H(v(mu)) for the adversarially widened outcome-
difference distribution v of the best virtual basis pair and drops the
square-root smoothing term:

    log2 d - H(v(mu)) - leak_EC/n - (2/n) log2(1/(2 (eps_PA - eps_bar)))

All entropies and key lengths are in bits.  The security failure budget
composes as eps = eps_EC + eps_PA + n_PE * eps_PE + eps_bar.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .states import DensityMatrix, bell_vector, isotropic_bell_spectrum, measure_joint, qber
from .tomography import extract_spectrum, z_error_distribution
from .weyl import is_prime, mub_eigenbases

__all__ = [
    "shannon_entropy",
    "asymptotic_rate_tomographic",
    "isotropic_asymptotic_rate",
    "zero_rate_qber",
    "conditional_entropy_AE",
    "min_HAE_over_ball",
    "mu_fluctuation",
    "leak_ec",
    "default_n_pe",
    "EpsilonBudget",
    "FiniteKeyParams",
    "RateResult",
    "smoothing_term",
    "pa_term_tomographic",
    "pa_term_ur",
    "finite_rate_tomographic",
    "ur_virtual_distribution",
    "virtual_difference_distribution",
    "widen_distribution",
    "finite_rate_ur",
    "ChannelEstimate",
    "estimate_channel",
    "optimize_rate",
]

BALL_MAX_ITER = 6000
BALL_TOL = 1e-14


def shannon_entropy(p) -> float:
    """Shannon entropy in bits of a probability vector; 0 log 0 = 0."""
    p = np.asarray(p, dtype=float).ravel()
    if p.min() < -1e-12:
        raise ValueError(f"negative probability {p.min()}")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"probabilities must sum to 1 within 1e-9, got {p.sum()}")
    return float(_kernels.entropy_bits(np.clip(p, 0.0, None)))


def asymptotic_rate_tomographic(lam, d: int) -> float:
    """log2 d - H(lam); may be negative when the spectrum is too mixed."""
    return math.log2(d) - shannon_entropy(np.asarray(lam, dtype=float).ravel())


def isotropic_asymptotic_rate(d: int, q: float) -> float:
    """Asymptotic tomographic rate of the isotropic channel at error rate q."""
    return asymptotic_rate_tomographic(isotropic_bell_spectrum(d, q), d)


def zero_rate_qber(d: int) -> float:
    """Error rate where the isotropic-channel asymptotic rate crosses zero."""
    hi = (d - 1) / d
    return float(brentq(lambda q: isotropic_asymptotic_rate(d, q), 1e-9, hi * (1 - 1e-12), xtol=1e-15))


def _validate_bell_table(lam: np.ndarray, d: int) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (d, d):
        raise ValueError(f"labeled spectrum must be {d}x{d}")
    if lam.min() < -1e-9 or abs(lam.sum() - 1.0) > 1e-8:
        raise ValueError("labeled spectrum is not a distribution")
    return np.clip(lam, 0.0, None) / np.clip(lam, 0.0, None).sum()


def _worst_case_bell_table(lam_flat: np.ndarray, d: int, q_hat: float, tol: float = 1e-6):
    """Assignment of unlabeled eigenvalues to Bell labels minimizing H(A|E).

    H(lam) is label-invariant, so the minimum is over H(e) subject to the
    group-0 sum matching 1 - q_hat.  Exhaustive for d <= 3; for larger d the
    relaxed bound h2-style minimum over all e with e_0 = 1 - q_hat is used,
    which never overstates the key.  Returns (table_or_None, h_e_min).
    """
    lam_flat = np.asarray(lam_flat, dtype=float).ravel()
    if lam_flat.shape[0] != d * d:
        raise ValueError(f"expected {d*d} eigenvalues")
    target = 1.0 - q_hat
    if d <= 3:
        idx = range(d * d)
        best = None
        for group0 in itertools.combinations(idx, d):
            e0 = lam_flat[list(group0)].sum()
            if abs(e0 - target) > tol:
                continue
            rest = sorted(set(idx) - set(group0))
            # split the rest into d-1 groups of d; group order beyond index 0
            # is irrelevant for H(e), so enumerate unordered partitions
            for part in _partitions(rest, d):
                e = [e0] + [lam_flat[list(g)].sum() for g in part]
                h_e = float(_kernels.entropy_bits(np.clip(np.array(e), 0.0, None)))
                if best is None or h_e < best[0]:
                    table = np.empty((d, d))
                    table[0] = lam_flat[list(group0)]
                    for i, g in enumerate(part, start=1):
                        table[i] = lam_flat[list(g)]
                    best = (h_e, table)
        if best is not None:
            return best[1], best[0]
    # relaxed minimum of H(e): all error mass on one symbol
    q = min(max(q_hat, 0.0), 1.0)
    h_e = float(_kernels.entropy_bits(np.array([1.0 - q, q])))
    return None, h_e


def _partitions(items: list[int], group_size: int):
    """Unordered partitions of items into groups of group_size."""
    if not items:
        yield []
        return
    first = items[0]
    rest = items[1:]
    for combo in itertools.combinations(rest, group_size - 1):
        group = (first,) + combo
        remaining = [x for x in rest if x not in combo]
        for tail in _partitions(remaining, group_size):
            yield [group] + tail


def conditional_entropy_AE(lam, d: int, q_hat: float | None = None) -> float:
    """H(A|E) = log2 d - H(lam) + H(e_Z) for a Bell-diagonal spectrum.

    ``lam`` as a (d, d) table is taken as labeled, rows indexing the Z-error
    symbol.  A flat vector is unlabeled: ``q_hat`` is then required and the
    worst (smallest) value over label assignments consistent with q_hat is
    returned.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 2:
        table = _validate_bell_table(lam, d)
        e = table.sum(axis=1)
        return math.log2(d) - shannon_entropy(table.ravel()) + float(_kernels.entropy_bits(e))
    if q_hat is None:
        raise ValueError("unlabeled spectrum requires q_hat for worst-case labeling")
    table, h_e = _worst_case_bell_table(lam.ravel(), d, q_hat)
    return math.log2(d) - shannon_entropy(lam.ravel()) + h_e


def min_HAE_over_ball(lam_hat, mu: float, d: int, q_hat: float | None = None) -> float:
    """Minimum of conditional_entropy_AE over the fluctuation ball.

    The ball is {lam' : |lam'_i - lam_hat_i| <= mu, lam' a distribution};
    the minimization is a concave maximization of H(lam) - H(e_Z) solved by
    projected gradient ascent, exact at mu = 0 by construction.
    """
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    lam_hat = np.asarray(lam_hat, dtype=float)
    if lam_hat.ndim == 1:
        if q_hat is None:
            raise ValueError("unlabeled spectrum requires q_hat")
        table, h_e = _worst_case_bell_table(lam_hat, d, q_hat)
        if table is None:
            # relaxed fallback: bound H(lam') and H(e') separately, widening
            # q_hat downward by the ball radius as well; this can only lower
            # the result and never overstates the key
            gap = _kernels.max_entropy_gap_ball(
                np.clip(lam_hat, 0.0, None).copy(), float(mu), 1, d * d, BALL_MAX_ITER, BALL_TOL
            )
            q_low = max(0.0, q_hat - d * mu)
            h_e = float(_kernels.entropy_bits(np.array([1.0 - q_low, q_low])))
            return math.log2(d) - float(gap) + h_e
        lam_hat = table
    table = _validate_bell_table(lam_hat, d)
    if mu == 0.0:
        return conditional_entropy_AE(table, d)
    lo_sum = np.maximum(table.ravel() - mu, 0.0).sum()
    hi_sum = np.minimum(table.ravel() + mu, 1.0).sum()
    if lo_sum > 1.0 or hi_sum < 1.0:
        raise ValueError("fluctuation ball contains no probability distribution")
    gap = _kernels.max_entropy_gap_ball(table.ravel().copy(), float(mu), d, d, BALL_MAX_ITER, BALL_TOL)
    return math.log2(d) - float(gap)


def mu_fluctuation(m: float, eps_pe: float) -> float:
    """Two-sided Hoeffding half-width sqrt(ln(1/eps_pe) / (2 m))."""
    if m < 1:
        raise ValueError("need at least one sample per parameter")
    if not 0.0 < eps_pe < 1.0:
        raise ValueError("eps_pe must lie in (0, 1)")
    return math.sqrt(math.log(1.0 / eps_pe) / (2.0 * m))


def leak_ec(n: float, e_z, ec_efficiency: float = 1.0) -> float:
    """Error-correction disclosure in bits: efficiency * n * H(e_Z)."""
    if ec_efficiency < 1.0:
        raise ValueError("ec_efficiency must be >= 1")
    return float(ec_efficiency) * float(n) * shannon_entropy(e_z)


def default_n_pe(d: int) -> int:
    """Estimated-parameter count: d^2 cells per setting pair, minus one
    normalization constraint per pair, over (d+1)^2 pairs."""
    return (d + 1) ** 2 * (d * d - 1)


@dataclass(frozen=True)
class EpsilonBudget:
    """Failure-probability split eps = eps_ec + eps_pa + n_pe*eps_pe + eps_bar."""

    eps_ec: float
    eps_pa: float
    eps_pe: float
    eps_bar: float
    n_pe: int

    def __post_init__(self):
        for name in ("eps_ec", "eps_pa", "eps_pe", "eps_bar"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.n_pe < 1:
            raise ValueError("n_pe must be >= 1")

    @property
    def composed(self) -> float:
        return self.eps_ec + self.eps_pa + self.n_pe * self.eps_pe + self.eps_bar

    def validate(self, eps_sec: float) -> None:
        if self.composed > eps_sec * (1.0 + 1e-9):
            raise ValueError(f"composed failure probability {self.composed} exceeds target {eps_sec}")


@dataclass(frozen=True)
class FiniteKeyParams:
    """Inputs of one finite-key evaluation at fixed n and budget."""

    N: float
    n: float
    d: int
    lambda_hat: np.ndarray = field(repr=False)
    q_hat: float
    mu: float
    budget: EpsilonBudget
    ec_efficiency: float = 1.0

    def __post_init__(self):
        if not 0 < self.n <= self.N:
            raise ValueError("need 0 < n <= N")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        if not 0.0 <= self.q_hat <= 1.0:
            raise ValueError("q_hat must lie in [0, 1]")


@dataclass(frozen=True)
class RateResult:
    """A rate with its term-by-term breakdown and the parameters that led to it."""

    rate_per_signal: float
    key_length: float
    terms: dict
    params: dict

    @property
    def rate_positive(self) -> bool:
        return self.rate_per_signal > 0.0

    def to_json_dict(self) -> dict:
        return {
            "rate_per_signal": self.rate_per_signal,
            "key_length": self.key_length,
            "rate_positive": self.rate_positive,
            "terms": dict(self.terms),
            "params": dict(self.params),
        }


def smoothing_term(d: int, n: float, eps_bar: float) -> float:
    """(2 log2 d + 3) sqrt(log2(2/eps_bar) / n); the finite-size cost of the
    direct technique.  eps_bar = 2 zeroes it (used by limit checks)."""
    arg = math.log2(2.0 / eps_bar) / n
    if arg < 0:
        raise ValueError("eps_bar above 2 is meaningless here")
    return (2.0 * math.log2(d) + 3.0) * math.sqrt(arg)


def pa_term_tomographic(n: float, eps_pa: float) -> float:
    """(2/n) log2(1/eps_PA)."""
    return (2.0 / n) * math.log2(1.0 / eps_pa)


def pa_term_ur(n: float, eps_pa: float, eps_bar: float) -> float:
    """(2/n) log2(1/(2 (eps_PA - eps_bar))); requires eps_PA > eps_bar."""
    if eps_pa <= eps_bar:
        raise ValueError("the UR privacy-amplification term requires eps_pa > eps_bar")
    return (2.0 / n) * math.log2(1.0 / (2.0 * (eps_pa - eps_bar)))


def _e_z_of(p: FiniteKeyParams) -> np.ndarray:
    lam = np.asarray(p.lambda_hat, dtype=float)
    if lam.ndim == 2:
        return z_error_distribution(_validate_bell_table(lam, p.d))
    # without labels, error correction is budgeted against the most expensive
    # error pattern consistent with q_hat: uniform over the d-1 error symbols
    e = np.full(p.d, p.q_hat / (p.d - 1))
    e[0] = 1.0 - p.q_hat
    return e


def _make_result(p: FiniteKeyParams, method: str, first: float, leak_per_n: float, pa: float, smooth: float) -> RateResult:
    bracket = first - leak_per_n - pa - smooth
    rate = (p.n / p.N) * bracket
    terms = {
        "first_term": first,
        "leak_ec_per_n": leak_per_n,
        "pa_term": pa,
        "smoothing_term": smooth,
        "sift_fraction": p.n / p.N,
    }
    params = {
        "method": method,
        "N": p.N,
        "n": p.n,
        "d": p.d,
        "mu": p.mu,
        "eps_pa": p.budget.eps_pa,
        "eps_pe": p.budget.eps_pe,
        "eps_bar": p.budget.eps_bar,
        "eps_ec": p.budget.eps_ec,
        "n_pe": p.budget.n_pe,
        "ec_efficiency": p.ec_efficiency,
    }
    return RateResult(rate, rate * p.N, terms, params)


def finite_rate_tomographic(p: FiniteKeyParams) -> RateResult:
    """Direct finite-key bound; negative values are returned as-is."""
    hae = min_HAE_over_ball(p.lambda_hat, p.mu, p.d, q_hat=p.q_hat)
    leak_per_n = leak_ec(p.n, _e_z_of(p), p.ec_efficiency) / p.n
    pa = pa_term_tomographic(p.n, p.budget.eps_pa)
    smooth = smoothing_term(p.d, p.n, p.budget.eps_bar)
    return _make_result(p, "tomographic", hae, leak_per_n, pa, smooth)


def virtual_difference_distribution(rho: DensityMatrix, d: int) -> np.ndarray:
    """Outcome-difference distribution of the best virtual MUB pair.

    Scans the d^2 pairs of observables mutually unbiased to Z (one on each
    side), folds each joint distribution along c = a + b mod d (the ideal
    state anticorrelates those bases), picks the pair of least entropy and
    rotates the fold so the dominant symbol sits at index 0.
    """
    bases = dict(mub_eigenbases(d))
    best = None
    for la in range(d):
        for lb in range(d):
            st = measure_joint(rho, bases[f"XZ{la}"], bases[f"XZ{lb}"])
            v = np.zeros(d)
            for a in range(d):
                for b in range(d):
                    v[(a + b) % d] += st.probs[a, b]
            h = float(_kernels.entropy_bits(np.clip(v, 0.0, None)))
            if best is None or h < best[0]:
                best = (h, v)
    v = best[1]
    v = np.roll(v, -int(np.argmax(v)))
    return np.clip(v, 0.0, None) / v.sum()


def widen_distribution(v: np.ndarray, mu: float, d: int) -> np.ndarray:
    """Adversarial widening: move mass mu out of the largest entry toward the
    uniform distribution (the direction of maximal entropy)."""
    v = np.asarray(v, dtype=float)
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    vmax = v.max()
    if mu == 0.0 or vmax <= 1.0 / d + 1e-15:
        return v.copy()
    alpha = min(1.0, mu / (vmax - 1.0 / d))
    return (1.0 - alpha) * v + alpha / d


def ur_virtual_distribution(source, d: int, mu: float) -> np.ndarray:
    """Widened virtual-basis distribution v(mu) fed into the UR bound.

    ``source`` is either the (reconstructed) bipartite state or a labeled
    Bell spectrum table, in which case the corresponding Bell-diagonal state
    is used.
    """
    if isinstance(source, DensityMatrix):
        rho = source
    else:
        lam = _validate_bell_table(np.asarray(source, dtype=float), d)
        m = np.zeros((d * d, d * d), dtype=complex)
        for k in range(d):
            for ell in range(d):
                phi = bell_vector(d, k, ell)
                m += lam[k, ell] * np.outer(phi, phi.conj())
        rho = DensityMatrix(m)
    v0 = virtual_difference_distribution(rho, d)
    return widen_distribution(v0, mu, d)


def finite_rate_ur(p: FiniteKeyParams, v: np.ndarray) -> RateResult:
    """Uncertainty-relation finite-key bound for a given widened v."""
    first = math.log2(p.d) - shannon_entropy(v)
    leak_per_n = leak_ec(p.n, _e_z_of(p), p.ec_efficiency) / p.n
    pa = pa_term_ur(p.n, p.budget.eps_pa, p.budget.eps_bar)
    return _make_result(p, "ur", first, leak_per_n, pa, 0.0)


@dataclass(frozen=True)
class ChannelEstimate:
    """Everything the rate optimizer needs to know about a channel."""

    d: int
    lambda_hat: np.ndarray = field(repr=False)  # (d, d) labeled, or flat unlabeled
    q_hat: float
    v0: np.ndarray = field(repr=False)  # unwidened virtual difference distribution
    bell_residual: float = 0.0


def estimate_channel(rho: DensityMatrix) -> ChannelEstimate:
    """Spectrum extraction plus the virtual-basis distribution of a state."""
    rep = extract_spectrum(rho)
    d = int(round(math.sqrt(rho.dim)))
    lam = rep.bell_lambda if rep.bell_lambda is not None else rep.lambda_
    return ChannelEstimate(
        d=d,
        lambda_hat=np.asarray(lam, dtype=float),
        q_hat=qber(rho),
        v0=virtual_difference_distribution(rho, d),
        bell_residual=rep.bell_diag_residual,
    )


def _geomspace(lo: float, hi: float, k: int) -> np.ndarray:
    return np.geomspace(lo, hi, k) if hi > lo else np.array([lo])


def optimize_rate(
    N: float,
    est: ChannelEstimate,
    eps_sec: float,
    eps_ec: float,
    method: str,
    ec_efficiency: float = 1.0,
    n_pe: int | None = None,
    grid_sizes: tuple[int, int, int] = (18, 12, 8),
    zoom_rounds: int = 4,
    zoom_factor: float = 5.0,
) -> RateResult:
    """Best finite-key rate over the key/estimation split and budget split.

    Deterministic grid search with successive zooming.  The kept-signal
    count is parametrized by the estimation fraction g = N_PE/N on a log
    grid; the budget remainder R = eps_sec - eps_ec is split by u (share
    assigned to parameter estimation) and, for the direct method, by w
    (share of the rest assigned to privacy amplification).  Ties prefer
    smaller n.  If no positive rate exists the best non-positive point is
    returned; check ``rate_positive``.
    """
    if method not in ("tomographic", "ur"):
        raise ValueError(f"unknown method {method!r}")
    if not 0 < eps_ec < eps_sec:
        raise ValueError("need 0 < eps_ec < eps_sec")
    d = est.d
    if n_pe is None:
        n_pe = default_n_pe(d)
    R = eps_sec - eps_ec
    n_settings = (d + 1) ** 2
    lam = np.asarray(est.lambda_hat, dtype=float)
    labeled = lam.ndim == 2
    e_z = z_error_distribution(lam) if labeled else None
    if e_z is None:
        e = np.full(d, est.q_hat / (d - 1))
        e[0] = 1.0 - est.q_hat
        e_z = e
    h_ez = shannon_entropy(e_z) * ec_efficiency
    logd = math.log2(d)
    ln = math.log

    hae_cache: dict[float, float] = {}

    def hae_at(mu: float) -> float:
        if mu not in hae_cache:
            hae_cache[mu] = min_HAE_over_ball(lam, mu, d, q_hat=est.q_hat)
        return hae_cache[mu]

    def evaluate(g: float, u: float, w: float):
        n_pe_signals = g * N
        m = n_pe_signals / n_settings
        n = N - n_pe_signals
        if m < 1.0 or n < 2.0:
            return None
        if method == "tomographic":
            eps_pe = u * R / n_pe
            rem = (1.0 - u) * R
            eps_pa = w * rem
            eps_bar = (1.0 - w) * rem
        else:
            eps_pe = u * R / (n_pe + 1)
            eps_bar = eps_pe
            eps_pa = (1.0 - u) * R
            if eps_pa <= eps_bar:
                return None
        if not (0 < eps_pe < 1 and 0 < eps_pa < 1 and 0 < eps_bar < 1):
            return None
        mu = math.sqrt(ln(1.0 / eps_pe) / (2.0 * m))
        if method == "tomographic":
            bracket = (
                hae_at(mu)
                - h_ez
                - (2.0 / n) * math.log2(1.0 / eps_pa)
                - (2.0 * logd + 3.0) * math.sqrt(math.log2(2.0 / eps_bar) / n)
            )
        else:
            v = widen_distribution(est.v0, mu, d)
            bracket = logd - float(_kernels.entropy_bits(np.clip(v, 0, None))) - h_ez - (2.0 / n) * math.log2(
                1.0 / (2.0 * (eps_pa - eps_bar))
            )
        return (n / N) * bracket

    kg, ku, kw = grid_sizes
    g_min_abs, g_max_abs = max(n_settings / N, 1e-11), 0.9
    u_min_abs, u_max_abs = 1e-6, 0.96
    g_lo, g_hi = g_min_abs, g_max_abs
    u_lo, u_hi = 1e-4, u_max_abs
    w_lo, w_hi = 0.02, 0.98
    best_rate = -math.inf
    best_point = None
    for _ in range(zoom_rounds):
        gs = _geomspace(g_lo, g_hi, kg)[::-1]  # descending g = ascending n
        us = _geomspace(u_lo, u_hi, ku)
        ws = np.linspace(w_lo, w_hi, kw) if method == "tomographic" else np.array([0.5])
        for g in gs:
            for u in us:
                for w in ws:
                    r = evaluate(float(g), float(u), float(w))
                    if r is not None and r > best_rate:
                        best_rate = r
                        best_point = (float(g), float(u), float(w))
        if best_point is None:
            break
        # shrink each search window by zoom_factor around the incumbent
        g0, u0, w0 = best_point
        g_half = math.sqrt(g_hi / g_lo) ** (1.0 / zoom_factor)
        g_lo = max(g0 / g_half, 1e-12)
        g_hi = min(g0 * g_half, 0.95)
        u_half = math.sqrt(u_hi / u_lo) ** (1.0 / zoom_factor)
        u_lo = max(u0 / u_half, u_min_abs)
        u_hi = min(u0 * u_half, 0.99)
        span_w = (w_hi - w_lo) / zoom_factor
        w_lo = max(w0 - span_w / 2, 0.005)
        w_hi = min(w0 + span_w / 2, 0.995)
    if best_point is None:
        raise ValueError("no feasible operating point: N too small for parameter estimation")
    g0, u0, w0 = best_point
    n_pe_signals = g0 * N
    m = n_pe_signals / n_settings
    n = N - n_pe_signals
    if method == "tomographic":
        eps_pe = u0 * R / n_pe
        rem = (1.0 - u0) * R
        budget = EpsilonBudget(eps_ec, w0 * rem, eps_pe, (1.0 - w0) * rem, n_pe)
    else:
        eps_pe = u0 * R / (n_pe + 1)
        budget = EpsilonBudget(eps_ec, (1.0 - u0) * R, eps_pe, eps_pe, n_pe)
    budget.validate(eps_sec)
    mu = mu_fluctuation(m, eps_pe)
    params = FiniteKeyParams(N=N, n=n, d=d, lambda_hat=lam, q_hat=est.q_hat, mu=mu, budget=budget, ec_efficiency=ec_efficiency)
    if method == "tomographic":
        result = finite_rate_tomographic(params)
    else:
        result = finite_rate_ur(params, widen_distribution(est.v0, mu, d))
    result.params["m_per_setting"] = m
    result.params["n_settings"] = n_settings
    return result
