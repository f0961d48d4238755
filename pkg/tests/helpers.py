"""Shared generators and independent oracles for the test suite.

The oracles here deliberately avoid the library's own code paths: entropy
via mpmath, the ball minimum via a dense numpy grid, correlators via
explicit Hilbert-Schmidt traces.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np

from rfi_qkd_lab.states import DensityMatrix, MeasurementStats, measure_joint
from rfi_qkd_lab.tomography import TomographyInput, expected_settings
from rfi_qkd_lab.weyl import mub_eigenbases


def random_density_matrix(rng: np.random.Generator, n: int) -> DensityMatrix:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_pure_ket(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_product_state(rng: np.random.Generator, d: int) -> DensityMatrix:
    a = random_pure_ket(rng, d)
    b = random_pure_ket(rng, d)
    ket = np.kron(a, b)
    return DensityMatrix(np.outer(ket, ket.conj()))


def random_separable_state(rng: np.random.Generator, d: int, max_terms: int = 4) -> DensityMatrix:
    k = int(rng.integers(1, max_terms + 1))
    weights = rng.dirichlet(np.ones(k))
    m = np.zeros((d * d, d * d), dtype=complex)
    for w in weights:
        a = random_pure_ket(rng, d)
        b = random_pure_ket(rng, d)
        ket = np.kron(a, b)
        m += w * np.outer(ket, ket.conj())
    return DensityMatrix(m)


def random_single_qudit_state(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return m / np.trace(m).real


def full_exact_stats(rho: DensityMatrix, d: int) -> TomographyInput:
    bases = dict(mub_eigenbases(d))
    stats = []
    for a in expected_settings(d):
        for b in expected_settings(d):
            stats.append(measure_joint(rho, bases[a], bases[b], a, b))
    return TomographyInput.from_list(d, stats)


def entropy_highprec(p, dps: int = 50) -> float:
    """Shannon entropy in bits evaluated with mpmath at high precision."""
    with mpmath.workdps(dps):
        total = mpmath.mpf(0)
        for x in np.asarray(p, dtype=float).ravel():
            if x > 0:
                xm = mpmath.mpf(repr(float(x)))
                total -= xm * mpmath.log(xm) / mpmath.log(2)
        return float(total)


def brute_force_min_hae(lam2d: np.ndarray, mu: float, step: float = 1e-4) -> float:
    """Dense-grid oracle for the d=2 ball minimum of H(A|E).

    Enumerates the first three coordinates on a regular grid inside the box
    and closes the simplex with the fourth; pure numpy, independent of the
    library's optimizer.
    """
    flat = np.asarray(lam2d, dtype=float).ravel()
    assert flat.shape == (4,)
    los = np.maximum(flat - mu, 0.0)
    his = np.minimum(flat + mu, 1.0)
    axes = [np.arange(lo, hi + step / 2, step) for lo, hi in zip(los[:3], his[:3])]
    a, b, c = np.meshgrid(*axes, indexing="ij")
    last = 1.0 - a - b - c
    ok = (last >= los[3] - 1e-15) & (last <= his[3] + 1e-15)
    a, b, c, last = a[ok], b[ok], c[ok], last[ok]

    def ent(x):
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = -x[pos] * np.log2(x[pos])
        return out

    h_lam = ent(a) + ent(b) + ent(c) + ent(last)
    h_e = ent(a + b) + ent(c + last)
    return math.log2(2) - float(np.max(h_lam - h_e))
