"""State reconstruction from MUB statistics and Bell-spectrum extraction.

For prime d the d+1 MUB measurements per side are tomographically complete:
every Weyl operator shares its eigenbasis with one of the measured
observables, so each correlator is an eigenvalue-weighted sum of observed
joint probabilities, and the state follows from the operator-basis
expansion rho = (1/d^2) sum <W>* W (the conjugate on the coefficient is
required because the Weyl operators are orthogonal but not Hermitian).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .states import DensityMatrix, MeasurementStats, bell_basis, trace_distance, z_phase_unitary
from .weyl import OrthonormalBasis, is_prime, mub_basis_index, mub_eigenbases, weyl_op
from .witness import CorrelatorTable

__all__ = [
    "expected_settings",
    "TomographyInput",
    "correlators_from_stats",
    "ReconstructionResult",
    "reconstruct_state",
    "SpectrumReport",
    "extract_spectrum",
    "z_error_distribution",
]

BELL_LABEL_TOL = 1e-6


def expected_settings(d: int) -> list[str]:
    """Measurement labels of the d+1 MUBs: Z and XZ0..XZ(d-1)."""
    return ["Z"] + [f"XZ{ell}" for ell in range(d)]


@dataclass(frozen=True)
class TomographyInput:
    """Complete set of joint statistics over all (d+1)^2 setting pairs."""

    d: int
    stats: dict[tuple[str, str], MeasurementStats] = field(repr=False)

    def __post_init__(self):
        if not is_prime(self.d):
            raise ValueError(f"d must be prime, got {self.d}")
        labels = expected_settings(self.d)
        missing = [(a, b) for a in labels for b in labels if (a, b) not in self.stats]
        if missing:
            raise ValueError(f"missing setting pairs: {missing}")
        for (a, b), st in self.stats.items():
            if a not in labels or b not in labels:
                raise ValueError(f"unknown setting pair ({a}, {b})")
            if st.d != self.d:
                raise ValueError(f"stats for ({a}, {b}) have dimension {st.d}, expected {self.d}")

    @classmethod
    def from_list(cls, d: int, stats: list[MeasurementStats]) -> "TomographyInput":
        table: dict[tuple[str, str], MeasurementStats] = {}
        for st in stats:
            key = (st.setting_a, st.setting_b)
            if key in table:
                raise ValueError(f"duplicate setting pair {key}")
            table[key] = st
        return cls(d, table)


def _eigenvalue_weights(d: int) -> dict[tuple[int, int], tuple[str, np.ndarray]]:
    """For each Weyl index, its host MUB label and per-outcome eigenvalues."""
    bases = dict(mub_eigenbases(d))
    out: dict[tuple[int, int], tuple[str, np.ndarray]] = {}
    for k in range(d):
        for ell in range(d):
            label = mub_basis_index(d, k, ell)
            vecs = bases[label].vectors
            w = weyl_op(d, k, ell)
            weights = np.einsum("aj,jk,ak->a", vecs.conj(), w, vecs)
            out[(k, ell)] = (label, weights)
    return out


def correlators_from_stats(inp: TomographyInput) -> CorrelatorTable:
    """Each correlator from the one setting pair sharing its eigenbases.

    The weight of outcome a is the eigenvalue of X^k Z^l itself on the
    outcome-a eigenvector of the host observable (a complex unit), not the
    host observable's eigenvalue.
    """
    d = inp.d
    weights = _eigenvalue_weights(d)
    t = np.zeros((d, d, d, d), dtype=complex)
    for k1 in range(d):
        for l1 in range(d):
            la, wa = weights[(k1, l1)]
            for k2 in range(d):
                for l2 in range(d):
                    lb, wb = weights[(k2, l2)]
                    p = inp.stats[(la, lb)].probs
                    t[k1, l1, k2, l2] = wa @ p @ wb
    return CorrelatorTable(d, t)


@dataclass(frozen=True)
class ReconstructionResult:
    state: DensityMatrix
    repair_distance: float
    reliable: bool


def reconstruct_state(table: CorrelatorTable, repair_threshold: float = 0.1) -> ReconstructionResult:
    """Operator-basis expansion of the correlator table, with positivity repair.

    On exact statistics the expansion is the state itself.  On sampled
    statistics the Hermitian estimate can have small negative eigenvalues;
    those are clipped, the trace renormalized, and the trace distance moved
    by the repair is reported.  A repair distance above ``repair_threshold``
    marks the statistics as unreliable.
    """
    d = table.d
    acc = np.zeros((d * d, d * d), dtype=complex)
    for k1 in range(d):
        for l1 in range(d):
            w1 = weyl_op(d, k1, l1)
            for k2 in range(d):
                for l2 in range(d):
                    coeff = np.conj(table.values[k1, l1, k2, l2])
                    if coeff != 0:
                        acc += coeff * np.kron(w1, weyl_op(d, k2, l2))
    acc /= d * d
    herm = 0.5 * (acc + acc.conj().T)
    vals, vecs = np.linalg.eigh(herm)
    clipped = np.clip(vals, 0.0, None)
    s = clipped.sum()
    if s <= 0:
        raise ValueError("reconstruction produced a non-positive operator")
    clipped /= s
    repaired = (vecs * clipped) @ vecs.conj().T
    dist = trace_distance(herm, repaired)
    state = DensityMatrix(0.5 * (repaired + repaired.conj().T))
    return ReconstructionResult(state, float(dist), bool(dist <= repair_threshold))


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues plus the best Bell-diagonalizing Z-commuting rotations.

    ``lambda_`` is the descending spectrum of the state.  ``bell_lambda`` is
    the (k, l)-labeled Bell-basis diagonal after the reported rotations and
    is only set when the off-diagonal residual is below tolerance; without
    labels the Z-error split of the spectrum is unknown and consumers fall
    back to worst-case labeling.
    """

    lambda_: np.ndarray
    frame_rotations: tuple[np.ndarray, np.ndarray] = field(repr=False)
    bell_diag_residual: float
    bell_lambda: np.ndarray | None = field(default=None, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "lambda": [float(x) for x in self.lambda_],
            "residual": float(self.bell_diag_residual),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def _bell_offdiag_residual(rho_mat: np.ndarray, bell: np.ndarray) -> tuple[float, np.ndarray]:
    rb = bell.conj() @ rho_mat @ bell.T
    diag = np.diag(rb)
    off = rb - np.diag(diag)
    return float(np.linalg.norm(off)), diag.real


def extract_spectrum(rho: DensityMatrix, residual_tol: float = BELL_LABEL_TOL) -> SpectrumReport:
    """Spectrum of a bipartite state and its best Bell-diagonal presentation.

    Searches the Z-commuting rotations (one phase vector per side, first
    phase pinned to zero) for the pair minimizing the Frobenius norm of the
    off-diagonal block in the Bell basis, by derivative-free descent from
    several starts.  The eigenvalue vector itself is rotation invariant.
    """
    dsq = rho.dim
    d = int(round(np.sqrt(dsq)))
    if d * d != dsq:
        raise ValueError("expected a bipartite state")
    lam = np.sort(np.linalg.eigvalsh(rho.matrix))[::-1]
    bell = bell_basis(d)

    def rotated(phis: np.ndarray) -> np.ndarray:
        u = z_phase_unitary(np.concatenate(([0.0], phis[: d - 1])))
        v = z_phase_unitary(np.concatenate(([0.0], phis[d - 1 :])))
        g = np.kron(u, v)
        return g @ rho.matrix @ g.conj().T

    def cost(phis: np.ndarray) -> float:
        return _bell_offdiag_residual(rotated(phis), bell)[0]

    zero = np.zeros(2 * (d - 1))
    res0, _ = _bell_offdiag_residual(rho.matrix, bell)
    best_phis = zero
    best_res = res0
    if res0 > 1e-10:
        starts = [zero]
        # Schmidt-phase start: phases of the dominant eigenvector's diagonal,
        # split evenly between the two sides.
        vals, vecs = np.linalg.eigh(rho.matrix)
        top = vecs[:, -1].reshape(d, d)
        md = np.diag(top)
        if np.all(np.abs(md) > 1e-12):
            theta = -np.angle(md / md[0])
            starts.append(np.concatenate([theta[1:] / 2.0, theta[1:] / 2.0]))
        rng = np.random.default_rng(0)
        for _ in range(3):
            starts.append(rng.uniform(0, 2 * np.pi, size=2 * (d - 1)))
        for x0 in starts:
            r = minimize(cost, x0, method="Powell", options={"xtol": 1e-12, "ftol": 1e-14, "maxiter": 4000})
            if r.fun < best_res:
                best_res = float(r.fun)
                best_phis = np.asarray(r.x)
            if best_res < 1e-11:
                break
    u = z_phase_unitary(np.concatenate(([0.0], best_phis[: d - 1])))
    v = z_phase_unitary(np.concatenate(([0.0], best_phis[d - 1 :])))
    _, diag = _bell_offdiag_residual(rotated(best_phis), bell)
    bell_lambda = diag.reshape(d, d) if best_res < residual_tol else None
    return SpectrumReport(lam, (u, v), best_res, bell_lambda)


def z_error_distribution(bell_lambda: np.ndarray) -> np.ndarray:
    """Z-basis error pattern e(k) = sum_l lambda[k, l]; e(0) = 1 - Q."""
    lam = np.asarray(bell_lambda, dtype=float)
    if lam.ndim != 2 or lam.shape[0] != lam.shape[1]:
        raise ValueError("bell_lambda must be a d x d table; unlabeled spectra carry no Z-error split")
    if lam.min() < -1e-9 or abs(lam.sum() - 1.0) > 1e-8:
        raise ValueError("bell_lambda is not a distribution")
    e = np.clip(lam.sum(axis=1), 0.0, None)
    return e / e.sum()
