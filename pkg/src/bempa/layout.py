"""Significant-figure-block (SFB) qubit layout.

Bit ``k`` of mode ``i`` lives on qubit ``k * n_modes + i``: all qubits that
carry the same binary significant figure ``2**k`` form one contiguous block.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class QubitLayout:
    n_modes: int
    k_per_mode: int

    def __post_init__(self):
        if self.n_modes < 1 or self.k_per_mode < 1:
            raise ValueError("layout needs at least one mode and one qubit per mode")

    @property
    def n_qubits(self) -> int:
        return self.n_modes * self.k_per_mode

    def qubit(self, mode: int, k: int) -> int:
        if not (0 <= mode < self.n_modes and 0 <= k < self.k_per_mode):
            raise IndexError(f"(mode={mode}, k={k}) outside layout")
        return k * self.n_modes + mode

    def mode_qubits(self, mode: int) -> list[int]:
        """Qubits of one mode, least significant figure first."""
        return [self.qubit(mode, k) for k in range(self.k_per_mode)]

    def block(self, k: int) -> list[int]:
        return [self.qubit(i, k) for i in range(self.n_modes)]

    def locate(self, qubit: int) -> tuple[int, int]:
        if not 0 <= qubit < self.n_qubits:
            raise IndexError(f"qubit {qubit} outside layout")
        k, mode = divmod(qubit, self.n_modes)
        return mode, k

    def as_map(self) -> dict[tuple[int, int], int]:
        return {(i, k): self.qubit(i, k) for i in range(self.n_modes) for k in range(self.k_per_mode)}
