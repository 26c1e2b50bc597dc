"""Dense matrices of every gate kind, including the particle-conserving A and B gates.

Local index convention: wire 0 of a gate is the least-significant bit of the
gate's local matrix index.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..pauli import PauliSum
from .ir import Gate

SQRT_HALF = np.sqrt(0.5)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=complex)
S = np.diag([1, 1j]).astype(complex)
SDG = S.conj()
# control is wire 0, target wire 1
CNOT = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)

# Hermitian generators: A(theta) = exp(-i theta G_A), B(alpha) = exp(-i alpha G_B)
A_GENERATOR = PauliSum.from_labels(2, [("X0 Y1", 0.5), ("Y0 X1", -0.5)])
# wires (high, low_a, low_b); this is the XXY - XYX - YXX - YYY form with wire labels reversed
B_GENERATOR = PauliSum.from_labels(
    3, [("Y0 X1 X2", 0.25), ("X0 Y1 X2", -0.25), ("X0 X1 Y2", -0.25), ("Y0 Y1 Y2", -0.25)]
)

_A_BLOCK = (2, 1)  # local states |01>, |10> written wire 0 first
_B_BLOCK = (1, 6)  # only the high wire set / both low wires set


def _givens(dim: int, block: tuple[int, int], angle: float) -> np.ndarray:
    u = np.eye(dim, dtype=complex)
    c, s = np.cos(angle), np.sin(angle)
    i, j = block
    u[i, i], u[i, j], u[j, i], u[j, j] = c, s, -s, c
    return u


def a_unitary(theta: float) -> np.ndarray:
    return _givens(4, _A_BLOCK, theta)


def b_unitary(alpha: float) -> np.ndarray:
    return _givens(8, _B_BLOCK, alpha)


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def xxyy(theta: float) -> np.ndarray:
    """exp(-i theta (XX + YY)); XX + YY is twice the swap of |01> and |10>."""
    u = np.eye(4, dtype=complex)
    c, s = np.cos(2 * theta), np.sin(2 * theta)
    u[1, 1], u[1, 2], u[2, 1], u[2, 2] = c, -1j * s, -1j * s, c
    return u


_FIXED = {"H": H, "S": S, "Sdg": SDG, "X": X, "CNOT": CNOT, "CZ": CZ}
_ROTATION = {"Rx": rx, "Ry": ry, "Rz": rz, "XXYY": xxyy, "AGate": a_unitary, "BGate": b_unitary}


def gate_angle(g: Gate, params: Sequence[float]) -> float:
    return g.scale * params[g.param_ref]


def gate_matrix(g: Gate, params: Sequence[float] = ()) -> np.ndarray:
    if g.parametric:
        return _ROTATION[g.kind](gate_angle(g, params))
    return _FIXED[g.kind]


def gate_generator(g: Gate) -> np.ndarray:
    """Hermitian ``K`` with ``gate_matrix(g) = exp(-i angle K)`` for parametric gates."""
    if g.kind == "AGate":
        from ..pauli import to_matrix
        return to_matrix(A_GENERATOR)
    if g.kind == "BGate":
        from ..pauli import to_matrix
        return to_matrix(B_GENERATOR)
    if g.kind == "XXYY":
        return np.kron(X, X) + np.kron(Y, Y)
    return {"Rx": X, "Ry": Y, "Rz": Z}[g.kind] / 2
