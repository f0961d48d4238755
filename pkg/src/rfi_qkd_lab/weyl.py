"""Weyl operators, mutually unbiased bases and small Hermitian eigenproblems.

Everything here lives in a prime dimension d.  The two generators are the
clock matrix Z = sum_j w^j |j><j| and the shift matrix X = sum_j |j+1><j|
with w = exp(2*pi*i/d) and index arithmetic modulo d; the d^2 unitaries
X^k Z^l form an orthogonal operator basis under the Hilbert-Schmidt inner
product, Tr(W1^dag W2) = d * delta.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ATOL_UNITARY = 1e-10
ATOL_HERMITIAN = 1e-10
ATOL_BASIS = 1e-10


def is_prime(n: int) -> bool:
    """Trial-division primality check; fine at the dimensions used here."""
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _require_prime(d: int) -> None:
    if not isinstance(d, (int, np.integer)) or not is_prime(int(d)):
        raise ValueError(f"dimension must be a prime integer >= 2, got {d!r}")


def omega(d: int) -> complex:
    """Primitive d-th root of unity exp(2*pi*i/d)."""
    return complex(np.exp(2j * np.pi / d))


def weyl_z(d: int) -> np.ndarray:
    """Clock matrix: diagonal of the d-th roots of unity."""
    _require_prime(d)
    j = np.arange(d)
    return np.diag(np.exp(2j * np.pi * j / d))


def weyl_x(d: int) -> np.ndarray:
    """Shift matrix: |j> -> |j+1 mod d>."""
    _require_prime(d)
    m = np.zeros((d, d), dtype=complex)
    j = np.arange(d)
    m[(j + 1) % d, j] = 1.0
    return m


def weyl_op(d: int, k: int, ell: int) -> np.ndarray:
    """The unitary X^k Z^ell with exponents reduced modulo d.

    Built entrywise: (X^k Z^ell)[ (j+k) % d, j ] = w^(ell*j).
    """
    _require_prime(d)
    k = int(k) % d
    ell = int(ell) % d
    m = np.zeros((d, d), dtype=complex)
    j = np.arange(d)
    m[(j + k) % d, j] = np.exp(2j * np.pi * ell * j / d)
    return m


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product Tr(a^dag b)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a.T)


@dataclass(frozen=True)
class OrthonormalBasis:
    """A complete orthonormal basis; ``vectors[a]`` is the outcome-a vector."""

    dim: int
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.shape != (self.dim, self.dim):
            raise ValueError(f"expected {self.dim} vectors of length {self.dim}, got {v.shape}")
        gram = v @ v.conj().T
        if not np.allclose(gram, np.eye(self.dim), atol=ATOL_BASIS):
            raise ValueError("vectors are not orthonormal within 1e-10")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "vectors", v)


def _fix_global_phase(v: np.ndarray) -> np.ndarray:
    """Rotate a vector so its first non-negligible component is real positive."""
    for x in v:
        if abs(x) > 1e-12:
            return v * (abs(x) / x)
    return v


def mub_eigenbases(d: int) -> list[tuple[str, OrthonormalBasis]]:
    """The d+1 mutually unbiased bases {Z, XZ^0, ..., XZ^(d-1)} for prime d.

    Outcome a of each basis is the eigenvector with eigenvalue w^a of the
    basis observable (for d = 2 and the XZ basis the observable is taken as
    i*XZ = Y so its eigenvalues are +-1).  Eigenvectors of XZ^ell follow the
    closed form v_j = w^(ell*j*(j-1)/2) * mu^(-j) / sqrt(d) with mu the raw
    XZ^ell eigenvalue; the first component 1/sqrt(d) fixes the global phase.
    """
    _require_prime(d)
    w = omega(d)
    out: list[tuple[str, OrthonormalBasis]] = []
    out.append(("Z", OrthonormalBasis(d, np.eye(d, dtype=complex))))
    for ell in range(d):
        # tau makes (tau * XZ^ell)^d = identity, so outcomes map to w^a.
        tau = 1.0 + 0j
        if d == 2 and ell == 1:
            tau = 1j
        vecs = np.empty((d, d), dtype=complex)
        j = np.arange(d)
        quad = np.exp(2j * np.pi * ell * (j * (j - 1) / 2.0) / d)
        for a in range(d):
            mu = w**a / tau
            vecs[a] = quad * (1.0 / mu) ** j / np.sqrt(d)
        out.append((f"XZ{ell}", OrthonormalBasis(d, vecs)))
    return out


def mub_basis_index(d: int, k: int, ell: int) -> str:
    """Label of the MUB whose eigenbasis diagonalizes X^k Z^ell.

    For k = 0 this is the Z basis; otherwise it is XZ^(ell * k^-1 mod d),
    since (XZ^m)^k is proportional to X^k Z^(m*k).
    """
    _require_prime(d)
    k = int(k) % d
    ell = int(ell) % d
    if k == 0:
        return "Z"
    k_inv = pow(k, -1, d)
    return f"XZ{(ell * k_inv) % d}"


def eig_hermitian(a: np.ndarray) -> tuple[np.ndarray, OrthonormalBasis]:
    """Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian matrix.

    Rejects inputs whose anti-Hermitian part exceeds 1e-10 entrywise.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(a - a.conj().T)) > ATOL_HERMITIAN:
        raise ValueError("matrix is not Hermitian within 1e-10")
    vals, vecs = np.linalg.eigh(a)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order].T
    vecs = np.array([_fix_global_phase(v) for v in vecs])
    return vals.real, OrthonormalBasis(a.shape[0], vecs)
