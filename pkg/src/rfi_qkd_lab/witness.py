"""Frame-invariant correlation witness for bipartite qudit states.

The witness statistic is the sum of squared moduli of the two-sided Weyl
correlators <X_A^k1 Z^l1 (x) X_B^k2 Z^l2> over k1, k2 >= 1 and all l1, l2.
It is invariant under local Z-commuting unitaries, bounded by (d-1)^2 on
separable states, and reaches d(d-1) on maximally entangled states.
Correlators of non-Hermitian operators are complex and are stored as such.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .states import DensityMatrix, _local_dim
from .weyl import weyl_op

__all__ = [
    "CorrelatorTable",
    "correlators_from_state",
    "c_parameter",
    "separable_bound",
    "max_c_value",
    "witness_verdict",
    "CDecomposition",
    "c_decomposition_check",
]

VERDICT_TOL = 1e-9


@dataclass(frozen=True)
class CorrelatorTable:
    """All d^4 Weyl correlators, indexed values[k1, l1, k2, l2]."""

    d: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.d,) * 4:
            raise ValueError(f"values must have shape {(self.d,)*4}")
        if abs(v[0, 0, 0, 0] - 1.0) > 1e-9:
            raise ValueError("normalization entry (0,0,0,0) must be 1")
        if np.abs(v).max() > 1.0 + 1e-9:
            raise ValueError("correlator magnitudes cannot exceed 1")
        v = v.copy()
        v[0, 0, 0, 0] = 1.0  # exact by definition, scrub float noise
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def to_json_dict(self) -> dict:
        vals = {}
        d = self.d
        for k1 in range(d):
            for l1 in range(d):
                for k2 in range(d):
                    for l2 in range(d):
                        z = self.values[k1, l1, k2, l2]
                        vals[f"{k1},{l1},{k2},{l2}"] = [float(z.real), float(z.imag)]
        return {"d": d, "values": vals}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "CorrelatorTable":
        d = int(doc["d"])
        v = np.zeros((d, d, d, d), dtype=complex)
        for key, (re, im) in doc["values"].items():
            k1, l1, k2, l2 = (int(x) for x in key.split(","))
            v[k1, l1, k2, l2] = re + 1j * im
        return cls(d, v)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CorrelatorTable":
        return cls.from_json_dict(json.loads(text))


def _weyl_stack(d: int, frame: np.ndarray | None) -> np.ndarray:
    ops = np.empty((d * d, d, d), dtype=complex)
    for k in range(d):
        for ell in range(d):
            w = weyl_op(d, k, ell)
            if frame is not None:
                w = frame @ w @ frame.conj().T
            ops[k * d + ell] = w
    return ops


def correlators_from_state(
    rho: DensityMatrix,
    u_a: np.ndarray | None = None,
    v_b: np.ndarray | None = None,
) -> CorrelatorTable:
    """Tr(rho * (X_A^k1 Z^l1 (x) X_B^k2 Z^l2)) for all index combinations.

    Optional frames rotate each side's operators, X_A = U X U^dag with
    [U, Z] = 0 (Z itself is shared and unrotated, which is the same thing
    because U commutes with Z).
    """
    d = _local_dim(rho)
    ops_a = _weyl_stack(d, u_a)
    ops_b = _weyl_stack(d, v_b)
    r = rho.matrix.reshape(d, d, d, d)
    t = np.einsum("jkmn,pmj,qnk->pq", r, ops_a, ops_b, optimize=True)
    return CorrelatorTable(d, t.reshape(d, d, d, d))


def c_parameter(table: CorrelatorTable) -> float:
    """Sum of |correlator|^2 over k1, k2 in [1, d) and l1, l2 in [0, d)."""
    block = table.values[1:, :, 1:, :]
    return float(np.sum(np.abs(block) ** 2))


def separable_bound(d: int) -> float:
    """Largest witness value attainable by separable states: (d-1)^2."""
    return float((d - 1) ** 2)


def max_c_value(d: int) -> float:
    """Witness value of a maximally entangled state: d(d-1)."""
    return float(d * (d - 1))


def witness_verdict(c: float, d: int) -> str:
    """"entangled" iff c exceeds the separable bound; the bound itself is
    attainable by product states, so equality stays "inconclusive"."""
    if c < 0:
        raise ValueError("c must be nonnegative")
    return "entangled" if c > separable_bound(d) + VERDICT_TOL else "inconclusive"


class CDecomposition(NamedTuple):
    full_sum: float
    z_slice_a: float
    z_slice_b: float
    zz_sum: float

    @property
    def combination(self) -> float:
        return self.full_sum - self.z_slice_a - self.z_slice_b + self.zz_sum


def c_decomposition_check(
    rho: DensityMatrix,
    u_a: np.ndarray | None = None,
    v_b: np.ndarray | None = None,
) -> CDecomposition:
    """Split the witness into its four partial sums and verify the identities.

    full_sum runs over all d^4 index tuples and equals d^2 Tr(rho^2); the two
    slice sums fix k1 = 0 or k2 = 0; their signed combination equals the
    witness.  Raises if either identity misses by more than 1e-9.
    """
    table = correlators_from_state(rho, u_a, v_b)
    sq = np.abs(table.values) ** 2
    full = float(sq.sum())
    z_a = float(sq[0, :, :, :].sum())
    z_b = float(sq[:, :, 0, :].sum())
    zz = float(sq[0, :, 0, :].sum())
    dec = CDecomposition(full, z_a, z_b, zz)
    d = table.d
    purity_lhs = d * d * rho.purity()
    if abs(full - purity_lhs) > 1e-9:
        raise AssertionError(f"full sum {full} != d^2 Tr(rho^2) = {purity_lhs}")
    if abs(dec.combination - c_parameter(table)) > 1e-9:
        raise AssertionError("signed combination does not reproduce the witness value")
    return dec
