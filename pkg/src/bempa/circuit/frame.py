"""Pauli-frame tracking under Clifford gates, and the short B-gate circuit built with it.

A frame stores, for every wire ``i``, the pair ``(p_i, pt_i)`` of signed Pauli
strings onto which the accumulated Clifford ``C`` maps ``Z_i`` and ``X_i``:
``p_i = C^dag Z_i C`` and ``pt_i = C^dag X_i C``.  A ``Rz`` on wire ``i`` placed
after ``C`` therefore rotates about ``p_i`` in the frame of the circuit input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..pauli import PauliString, PauliSum, multiply
from .ir import CLIFFORD, Circuit, Gate


class UnsupportedGateError(ValueError):
    """Frame tracking only understands Clifford gates."""


@dataclass(frozen=True)
class SignedPauli:
    sign: int
    pauli: PauliString

    def __mul__(self, other: "SignedPauli") -> tuple[complex, PauliString]:
        phase, p = multiply(self.pauli, other.pauli)
        return self.sign * other.sign * phase, p

    def to_sum(self) -> PauliSum:
        return PauliSum(self.pauli.n_qubits, [(self.pauli, self.sign)])

    def __str__(self) -> str:
        return ("-" if self.sign < 0 else "+") + self.pauli.label


def _hermitian(phase: complex, p: PauliString) -> SignedPauli:
    if abs(phase.imag) > 1e-12:
        raise ArithmeticError(f"frame entry picked up non-real phase {phase}")
    return SignedPauli(1 if phase.real > 0 else -1, p)


class PauliFrame:
    """Mutable, single-owner tableau of ``(p_i, pt_i)`` rows."""

    def __init__(self, rows: list[tuple[SignedPauli, SignedPauli]]):
        self.rows = list(rows)

    @classmethod
    def default(cls, n_qubits: int) -> "PauliFrame":
        rows = []
        for q in range(n_qubits):
            z = PauliString(n_qubits, 0, 1 << q)
            x = PauliString(n_qubits, 1 << q, 0)
            rows.append((SignedPauli(1, z), SignedPauli(1, x)))
        return cls(rows)

    @property
    def n_qubits(self) -> int:
        return len(self.rows)

    def copy(self) -> "PauliFrame":
        return PauliFrame(self.rows)

    def p(self, i: int) -> SignedPauli:
        return self.rows[i][0]

    def pt(self, i: int) -> SignedPauli:
        return self.rows[i][1]

    def is_default(self) -> bool:
        return self.rows == PauliFrame.default(self.n_qubits).rows

    def check(self) -> bool:
        """Each pair anticommutes and commutes with every entry of the other rows."""
        for i, (a, at) in enumerate(self.rows):
            if a.pauli.commutes(at.pauli):
                return False
            for j, (b, bt) in enumerate(self.rows):
                if i != j and not all(u.pauli.commutes(v.pauli) for u in (a, at) for v in (b, bt)):
                    return False
        return True

    def __str__(self) -> str:
        return "\n".join(f"{str(a):>14}  {str(b):>14}" for a, b in self.rows)


def frame_apply(f: PauliFrame, g: Gate) -> PauliFrame:
    """Return the frame after appending Clifford gate ``g``."""
    if g.kind not in CLIFFORD:
        raise UnsupportedGateError(f"cannot track {g.kind} in a Pauli frame")
    rows = list(f.rows)
    if g.kind == "H":
        (i,) = g.qubits
        p, pt = rows[i]
        rows[i] = (pt, p)
    elif g.kind in ("S", "Sdg"):
        # S^dag X S = -Y = i Z X ;  S X S^dag = Y = -i Z X
        (i,) = g.qubits
        p, pt = rows[i]
        phase, prod = p * pt
        factor = 1j if g.kind == "S" else -1j
        rows[i] = (p, _hermitian(factor * phase, prod))
    elif g.kind == "X":
        (i,) = g.qubits
        p, pt = rows[i]
        rows[i] = (SignedPauli(-p.sign, p.pauli), pt)
    elif g.kind == "CNOT":
        c, t = g.qubits
        pc, ptc = rows[c]
        pt_, ptt = rows[t]
        rows[t] = (_hermitian(*(pc * pt_)), ptt)
        rows[c] = (pc, _hermitian(*(ptc * ptt)))
    elif g.kind == "CZ":
        a, b = g.qubits
        pa, pta = rows[a]
        pb, ptb = rows[b]
        rows[a] = (pa, _hermitian(*(pta * pb)))
        rows[b] = (pb, _hermitian(*(pa * ptb)))
    return PauliFrame(rows)


def track(gates: Iterable[Gate], n_qubits: int, frame: PauliFrame | None = None) -> PauliFrame:
    frame = frame or PauliFrame.default(n_qubits)
    for g in gates:
        frame = frame_apply(frame, g)
    return frame


def _g(kind: str, *qubits: int, param: int | None = None, scale: float = 1.0) -> Gate:
    return Gate(kind, qubits, param, scale)


# Each stage is a Clifford prefix followed by Rz on wire 2 with the given sign.
B_STAGES: tuple[tuple[tuple[Gate, ...], int], ...] = (
    ((_g("H", 0), _g("H", 1), _g("S", 2), _g("H", 2), _g("CNOT", 0, 1), _g("CNOT", 1, 2)), +1),
    ((_g("H", 0), _g("CNOT", 0, 2)), -1),
    ((_g("H", 1), _g("CNOT", 1, 2)), -1),
    ((_g("CNOT", 0, 2),), +1),
)
B_CLOSING: tuple[Gate, ...] = (
    _g("S", 1), _g("H", 1), _g("CNOT", 1, 2), _g("H", 2), _g("H", 1),
    _g("S", 1), _g("S", 1), _g("S", 1), _g("CNOT", 1, 0),
)


def b_decomposition(param_ref: int = 0, n_params: int | None = None, flip: int | None = None) -> Circuit:
    """Depth-13 CNOT + one-qubit circuit equal to ``b_unitary`` up to global phase.

    Each stage rotates by ``Rz(+-alpha/2)`` about a weight-3 Pauli axis, one
    stage per generator term.  ``flip`` negates one stage sign (negative control).
    """
    gates: list[Gate] = []
    for idx, (prefix, sign) in enumerate(B_STAGES):
        if flip == idx:
            sign = -sign
        gates.extend(prefix)
        gates.append(_g("Rz", 2, param=param_ref, scale=0.5 * sign))
    gates.extend(B_CLOSING)
    return Circuit(3, gates, n_params if n_params is not None else param_ref + 1)


def stage_axes() -> list[SignedPauli]:
    """Signed rotation axis ``p_2`` seen by each Rz stage of the decomposition."""
    frame = PauliFrame.default(3)
    axes = []
    for prefix, _ in B_STAGES:
        frame = track(prefix, 3, frame)
        axes.append(frame.p(2))
    return axes


def pauli_rotation_ladder(term: PauliString, coeff: float, param_ref: int) -> list[Gate]:
    """exp(-i alpha coeff P) with basis changes and a CNOT ladder onto the last support qubit."""
    wires = [q for q in range(term.n_qubits) if (term.support >> q) & 1]
    pre, post = [], []
    for q in wires:
        letter = term.op(q)
        if letter == "X":
            pre.append(_g("H", q))
            post.append(_g("H", q))
        elif letter == "Y":
            pre += [_g("Sdg", q), _g("H", q)]
            post += [_g("H", q), _g("S", q)]
    ladder = [_g("CNOT", a, b) for a, b in zip(wires, wires[1:])]
    rot = _g("Rz", wires[-1], param=param_ref, scale=2 * coeff)
    return pre + ladder + [rot] + ladder[::-1] + post


def b_ladder_decomposition(param_ref: int = 0) -> Circuit:
    """Product-formula baseline: one CNOT-ladder rotation per generator term."""
    from .gates import B_GENERATOR

    gates: list[Gate] = []
    for p, c in B_GENERATOR.sorted_terms():
        gates.extend(pauli_rotation_ladder(p, c.real, param_ref))
    return Circuit(3, gates, param_ref + 1)
