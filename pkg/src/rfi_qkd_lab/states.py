"""Bipartite qudit states, misalignment channels, QBER and measurement statistics.

The key-generation basis Z is shared between the two parties; channel
misalignment is modeled by local unitaries that commute with Z (diagonal
phase unitaries), applied to the state.  The canonical noise model is the
isotropic state (1-p)|Phi><Phi| + p*I/d^2 whose mixing weight is chosen to
hit a target Z-basis error rate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .weyl import OrthonormalBasis, is_prime, weyl_op, weyl_z

ATOL_STATE = 1e-10
PSD_TOL = 1e-9
ZCOMM_TOL = 1e-12


@dataclass(frozen=True)
class DensityMatrix:
    """Trace-one positive-semidefinite Hermitian matrix."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(m - m.conj().T)) > ATOL_STATE:
            raise ValueError("density matrix is not Hermitian within 1e-10")
        tr = np.trace(m).real
        if abs(tr - 1.0) > ATOL_STATE:
            raise ValueError(f"trace must be 1 within 1e-10, got {tr}")
        if np.linalg.eigvalsh(m).min() < -PSD_TOL:
            raise ValueError("density matrix has an eigenvalue below -1e-9")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


def _local_dim(rho: DensityMatrix) -> int:
    d = math.isqrt(rho.dim)
    if d * d != rho.dim:
        raise ValueError(f"expected a bipartite state on d^2, got dimension {rho.dim}")
    return d


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """(1/2)||a - b||_1 for Hermitian a, b."""
    return float(0.5 * np.abs(np.linalg.eigvalsh(np.asarray(a) - np.asarray(b))).sum())


def bell_vector(d: int, k: int = 0, ell: int = 0) -> np.ndarray:
    """|Phi_{k,l}> = (I (x) X^k Z^l) (1/sqrt(d)) sum_j |jj>."""
    if not is_prime(d):
        raise ValueError(f"d must be prime, got {d}")
    w = weyl_op(d, k, ell)
    phi = np.zeros(d * d, dtype=complex)
    for j in range(d):
        phi[j * d : (j + 1) * d] += w[:, j]
    return phi / np.sqrt(d)


def bell_basis(d: int) -> np.ndarray:
    """All d^2 Bell vectors; row m = k*d + ell is |Phi_{k,l}>."""
    states = np.array([bell_vector(d, k, ell) for k in range(d) for ell in range(d)])
    gram = states @ states.conj().T
    if not np.allclose(gram, np.eye(d * d), atol=1e-10):
        raise AssertionError("Bell basis failed orthonormality check")
    return states


def bell_state(d: int) -> DensityMatrix:
    """Rank-one projector onto |Phi_{0,0}>."""
    phi = bell_vector(d, 0, 0)
    return DensityMatrix(np.outer(phi, phi.conj()))


def isotropic_state(d: int, qber_target: float) -> DensityMatrix:
    """(1-p)|Phi><Phi| + p I/d^2 with p = qber_target * d/(d-1).

    The mixing weight makes the Z-basis error rate equal qber_target; the
    admissible range is [0, (d-1)/d), the maximally mixed value excluded.
    """
    if not is_prime(d):
        raise ValueError(f"d must be prime, got {d}")
    if not 0.0 <= qber_target < (d - 1) / d:
        raise ValueError(f"qber_target must lie in [0, {(d-1)/d}), got {qber_target}")
    p = qber_target * d / (d - 1)
    phi = bell_vector(d, 0, 0)
    m = (1 - p) * np.outer(phi, phi.conj()) + p * np.eye(d * d) / (d * d)
    return DensityMatrix(m)


def isotropic_bell_spectrum(d: int, qber_target: float) -> np.ndarray:
    """Bell-basis spectrum of isotropic_state(d, qber_target) as a (d, d) table."""
    if not 0.0 <= qber_target < (d - 1) / d:
        raise ValueError(f"qber_target must lie in [0, {(d-1)/d}), got {qber_target}")
    p = qber_target * d / (d - 1)
    lam = np.full((d, d), p / d**2)
    lam[0, 0] = 1 - p + p / d**2
    return lam


def qber(rho: DensityMatrix) -> float:
    """Z-basis error rate Pr(a != b), outcome-matched so bell_state gives 0.

    With |Phi_{0,0}> = sum_j |jj>/sqrt(d) the Z (x) Z outcomes of the ideal
    state are already equal, so no relabeling of Bob's outcome is needed;
    on the Bell state |Phi_{k,l}> the outcomes satisfy b - a = k mod d.
    """
    d = _local_dim(rho)
    r = rho.matrix.reshape(d, d, d, d)
    correct = sum(r[a, a, a, a].real for a in range(d))
    return float(1.0 - correct)


def z_phase_unitary(phases: np.ndarray) -> np.ndarray:
    """diag(exp(i*phases)); the commutant of the nondegenerate Z."""
    phases = np.asarray(phases, dtype=float)
    return np.diag(np.exp(1j * phases))


def z_commuting_unitary(d: int, seed: int) -> np.ndarray:
    """Seeded random diagonal phase unitary; commutes with Z exactly."""
    if not is_prime(d):
        raise ValueError(f"d must be prime, got {d}")
    rng = np.random.default_rng(seed)
    return z_phase_unitary(rng.uniform(0.0, 2.0 * np.pi, size=d))


def frame_unitaries(d: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """A deterministic misalignment pair (U_A, V_B) derived from one seed."""
    child_a, child_b = np.random.SeedSequence(seed).spawn(2)
    rng_a = np.random.default_rng(child_a)
    rng_b = np.random.default_rng(child_b)
    u = z_phase_unitary(rng_a.uniform(0.0, 2.0 * np.pi, size=d))
    v = z_phase_unitary(rng_b.uniform(0.0, 2.0 * np.pi, size=d))
    return u, v


def _check_z_commuting_unitary(u: np.ndarray, d: int, name: str) -> None:
    u = np.asarray(u)
    if u.shape != (d, d):
        raise ValueError(f"{name} must be {d}x{d}")
    if np.max(np.abs(u @ u.conj().T - np.eye(d))) > 1e-10:
        raise ValueError(f"{name} is not unitary")
    z = weyl_z(d)
    if np.max(np.abs(u @ z - z @ u)) > ZCOMM_TOL:
        raise ValueError(f"{name} does not commute with Z within 1e-12")


def apply_misalignment(rho: DensityMatrix, u_a: np.ndarray, v_b: np.ndarray) -> DensityMatrix:
    """(U_A (x) V_B) rho (U_A (x) V_B)^dag for Z-commuting local unitaries."""
    d = _local_dim(rho)
    _check_z_commuting_unitary(u_a, d, "u_a")
    _check_z_commuting_unitary(v_b, d, "v_b")
    g = np.kron(u_a, v_b)
    return DensityMatrix(g @ rho.matrix @ g.conj().T)


def apply_z_tilt(rho: DensityMatrix, theta: float) -> DensityMatrix:
    """Tilt Bob's Z axis by rotating his qubit about X; qubits only.

    On bell_state(2) the resulting error rate is sin^2(theta/2).
    """
    d = _local_dim(rho)
    if d != 2:
        raise ValueError("z tilt is only defined for d = 2")
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    r = np.array([[c, -1j * s], [-1j * s, c]])
    g = np.kron(np.eye(2), r)
    return DensityMatrix(g @ rho.matrix @ g.conj().T)


@dataclass(frozen=True)
class MeasurementStats:
    """Joint outcome distribution p(a, b) for one pair of measurement settings."""

    d: int
    setting_a: str
    setting_b: str
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (self.d, self.d):
            raise ValueError(f"probs must be {self.d}x{self.d}")
        if p.min() < -1e-12:
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-10:
            raise ValueError(f"probabilities must sum to 1 within 1e-10, got {p.sum()}")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    def to_json_dict(self) -> dict:
        return {
            "d": self.d,
            "setting_a": self.setting_a,
            "setting_b": self.setting_b,
            "probs": [[float(x) for x in row] for row in self.probs],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "MeasurementStats":
        return cls(int(doc["d"]), str(doc["setting_a"]), str(doc["setting_b"]), np.array(doc["probs"], dtype=float))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MeasurementStats":
        return cls.from_json_dict(json.loads(text))


def measure_joint(
    rho: DensityMatrix,
    basis_a: OrthonormalBasis,
    basis_b: OrthonormalBasis,
    setting_a: str = "A",
    setting_b: str = "B",
) -> MeasurementStats:
    """Exact joint probabilities p(a, b) = <e_a f_b| rho |e_a f_b>."""
    d = _local_dim(rho)
    if basis_a.dim != d or basis_b.dim != d:
        raise ValueError(f"bases must live on dimension {d}")
    r = rho.matrix.reshape(d, d, d, d)
    ea = basis_a.vectors
    fb = basis_b.vectors
    p = np.einsum("aj,bk,jklm,al,bm->ab", ea.conj(), fb.conj(), r, ea, fb, optimize=True).real
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    return MeasurementStats(d, setting_a, setting_b, p)


def sample_stats(stats: MeasurementStats, shots: int, seed: int) -> MeasurementStats:
    """Empirical frequencies of a multinomial draw over the d^2 joint outcomes."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, stats.probs.ravel()).reshape(stats.d, stats.d)
    return MeasurementStats(stats.d, stats.setting_a, stats.setting_b, counts / shots)
