"""Dense check of a circuit against a target unitary, modulo global phase."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from ..pauli import ORACLE_MAX_QUBITS, ResourceError
from .ir import Circuit


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """min over phi of max |u - e^{i phi} v|."""
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    overlap = np.vdot(v, u)
    phi0 = np.angle(overlap) if abs(overlap) > 1e-300 else 0.0

    def dist(phi):
        return float(np.max(np.abs(u - np.exp(1j * phi) * v)))

    best = minimize_scalar(dist, bounds=(phi0 - 0.5, phi0 + 0.5), method="bounded",
                           options={"xatol": 1e-14})
    return min(dist(phi0), float(best.fun))


def verify_decomposition(c: Circuit, target: np.ndarray, params: Sequence[float] = ()) -> float:
    if c.n_qubits > ORACLE_MAX_QUBITS:
        raise ResourceError(f"{c.n_qubits} qubits exceeds the dense cap of {ORACLE_MAX_QUBITS}")
    if target.shape != (1 << c.n_qubits,) * 2:
        raise ValueError(f"target shape {target.shape} does not match {c.n_qubits} qubits")
    from ..sim import circuit_unitary

    return phase_distance(circuit_unitary(c, params), np.asarray(target))
