"""Ansatz builders: BEMPA (standard and exhaustive) and the penalty-method baselines."""

from __future__ import annotations

from typing import Sequence

from ..layout import QubitLayout
from .ir import Circuit, Gate


class OccupationError(ValueError):
    """An occupation does not fit the per-mode truncation."""


class BrickSchedule:
    """Default BEMPA layer: A gates within each SFB, then B gates bridging SFB k and k+1.

    Mode pairs are the chain neighbours ``(i, i+1)``; pairs whose left index
    matches the layer parity go first.  The B gate of pair ``(i, i+1)`` at
    block ``k`` takes its level-(k+1) qubit from mode ``(i + layer) % n``.
    """

    name = "brick"

    @staticmethod
    def pairs(n_modes: int, layer: int) -> list[tuple[int, int]]:
        all_pairs = [(i, i + 1) for i in range(n_modes - 1)]
        return [p for p in all_pairs if p[0] % 2 == layer % 2] + [p for p in all_pairs if p[0] % 2 != layer % 2]

    def layer(self, layout: QubitLayout, layer: int) -> list[tuple[str, tuple[int, ...]]]:
        n, kmax = layout.n_modes, layout.k_per_mode
        pairs = self.pairs(n, layer)
        ops = []
        for k in range(kmax):
            for i, j in pairs:
                ops.append(("AGate", (layout.qubit(i, k), layout.qubit(j, k))))
        for k in range(kmax - 1):
            for i, j in pairs:
                m = (i + layer) % n
                ops.append(("BGate", (layout.qubit(m, k + 1), layout.qubit(i, k), layout.qubit(j, k))))
        return ops


class ExhaustiveSchedule(BrickSchedule):
    """Every A gate is followed by B gates joining its two qubits to each level-(k+1) qubit."""

    name = "exhaustive"

    def layer(self, layout: QubitLayout, layer: int) -> list[tuple[str, tuple[int, ...]]]:
        n, kmax = layout.n_modes, layout.k_per_mode
        ops = []
        for k in range(kmax):
            for i, j in self.pairs(n, layer):
                lo = (layout.qubit(i, k), layout.qubit(j, k))
                ops.append(("AGate", lo))
                if k + 1 < kmax:
                    for m in range(n):
                        ops.append(("BGate", (layout.qubit(m, k + 1),) + lo))
        return ops


SCHEDULES = {"standard": BrickSchedule, "exhaustive": ExhaustiveSchedule}


def greedy_occupations(n_modes: int, d: int, n_target: int) -> list[int]:
    if not 0 <= n_target <= n_modes * (d - 1):
        raise OccupationError(f"{n_target} particles do not fit {n_modes} modes of {d} levels")
    occ = []
    left = n_target
    for _ in range(n_modes):
        take = min(left, d - 1)
        occ.append(take)
        left -= take
    return occ


def basis_index(layout: QubitLayout, occupations: Sequence[int]) -> int:
    """Computational-basis index of binary-encoded occupations on the SFB layout."""
    if len(occupations) != layout.n_modes:
        raise OccupationError(f"expected {layout.n_modes} occupations, got {len(occupations)}")
    index = 0
    for i, occ in enumerate(occupations):
        if not 0 <= occ < (1 << layout.k_per_mode):
            raise OccupationError(f"occupation {occ} of mode {i} overflows {layout.k_per_mode} bits")
        for k in range(layout.k_per_mode):
            if (occ >> k) & 1:
                index |= 1 << layout.qubit(i, k)
    return index


def preparation_circuit(layout: QubitLayout, occupations: Sequence[int]) -> Circuit:
    index = basis_index(layout, occupations)
    gates = [Gate("X", (q,)) for q in range(layout.n_qubits) if (index >> q) & 1]
    return Circuit(layout.n_qubits, gates)


def build_bempa(
    layout: QubitLayout,
    occupations: Sequence[int],
    layers: int,
    variant: str = "standard",
    d: int | None = None,
    schedule: BrickSchedule | None = None,
) -> tuple[Circuit, int]:
    """BEMPA circuit and the basis index of its (binary-encoded) initial state.

    Every gate is an A or B gate, so the total particle count of the initial
    occupations is preserved for all parameter values.
    """
    d = d if d is not None else 1 << layout.k_per_mode
    if d > (1 << layout.k_per_mode):
        raise OccupationError(f"d={d} does not fit {layout.k_per_mode} qubits per mode")
    for i, occ in enumerate(occupations):
        if not 0 <= occ < d:
            raise OccupationError(f"occupation {occ} of mode {i} outside [0, {d})")
    initial = basis_index(layout, occupations)
    schedule = schedule or SCHEDULES[variant]()
    gates = []
    for ell in range(layers):
        for kind, qubits in schedule.layer(layout, ell):
            gates.append(Gate(kind, qubits, len(gates)))
    circuit = Circuit(
        layout.n_qubits, gates, len(gates),
        metadata={"ansatz": f"bempa_{variant}" if variant != "standard" else "bempa", "layers": layers},
    )
    return circuit, initial


PENALTY_KINDS = ("RyCx", "RxCzRy", "XXYYRy")


def build_penalty_ansatz(kind: str, n_qubits: int, layers: int) -> Circuit:
    """Layered hardware-efficient baselines with independent parameters per layer."""
    if kind not in PENALTY_KINDS:
        raise ValueError(f"unknown penalty ansatz {kind!r}; choose from {PENALTY_KINDS}")
    if n_qubits < 2:
        raise ValueError("penalty ansatze need at least two qubits")
    gates: list[Gate] = []
    n_params = 0

    def rot(axis):
        nonlocal n_params
        for q in range(n_qubits):
            gates.append(Gate(axis, (q,), n_params))
            n_params += 1

    chain = [(q, q + 1) for q in range(n_qubits - 1)]
    bricks = chain[0::2] + chain[1::2]
    for _ in range(layers):
        if kind == "RyCx":
            rot("Ry")
            gates.extend(Gate("CNOT", pair) for pair in chain)
        elif kind == "RxCzRy":
            rot("Rx")
            gates.extend(Gate("CZ", pair) for pair in chain)
            rot("Ry")
        else:
            for pair in bricks:
                gates.append(Gate("XXYY", pair, n_params))
                n_params += 1
            rot("Ry")
    return Circuit(n_qubits, gates, n_params, metadata={"ansatz": kind, "layers": layers})
