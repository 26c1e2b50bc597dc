"""Gate and circuit intermediate representation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

ARITY = {
    "CNOT": 2, "CZ": 2, "H": 1, "S": 1, "Sdg": 1, "X": 1,
    "Rx": 1, "Ry": 1, "Rz": 1, "XXYY": 2, "AGate": 2, "BGate": 3,
}
PARAMETRIC = {"Rx", "Ry", "Rz", "XXYY", "AGate", "BGate"}
CLIFFORD = {"CNOT", "CZ", "H", "S", "Sdg", "X"}

# depth cost of composite gates under the CNOT + arbitrary-one-qubit gate set
COMPOSITE_DEPTH = {"AGate": 5, "BGate": 13, "XXYY": 5}


@dataclass(frozen=True)
class Gate:
    """One gate.  The rotation angle of a parametric gate is ``scale * params[param_ref]``.

    ``BGate`` qubits are ordered ``(high, low_a, low_b)``: it mixes the local
    states where only ``high`` is set and where only ``low_a`` and ``low_b`` are set.
    """

    kind: str
    qubits: tuple[int, ...]
    param_ref: Optional[int] = None
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != ARITY[self.kind]:
            raise ValueError(f"{self.kind} acts on {ARITY[self.kind]} qubits, got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.kind}{self.qubits}")
        if (self.kind in PARAMETRIC) != (self.param_ref is not None):
            raise ValueError(f"{self.kind} parameter reference mismatch: {self.param_ref}")

    @property
    def parametric(self) -> bool:
        return self.param_ref is not None

    def remap(self, qubit_map) -> "Gate":
        return Gate(self.kind, tuple(qubit_map[q] for q in self.qubits), self.param_ref, self.scale)

    def with_param(self, param_ref: Optional[int]) -> "Gate":
        return Gate(self.kind, self.qubits, param_ref, self.scale)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    n_params: int = 0
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(not 0 <= q < self.n_qubits for q in g.qubits):
                raise ValueError(f"{g} addresses a qubit outside {self.n_qubits}")
            if g.parametric and not 0 <= g.param_ref < self.n_params:
                raise ValueError(f"{g} references parameter outside {self.n_params}")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def then(self, other: "Circuit", share_params: bool = False) -> "Circuit":
        """Append ``other``; its parameters are shifted unless ``share_params``."""
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot concatenate circuits of different width")
        offset = 0 if share_params else self.n_params
        tail = [g.with_param(g.param_ref + offset) if g.parametric else g for g in other.gates]
        n_params = max(self.n_params, other.n_params) if share_params else self.n_params + other.n_params
        return Circuit(self.n_qubits, self.gates + tuple(tail), n_params, dict(self.metadata))

    def count(self, kind: str) -> int:
        return sum(g.kind == kind for g in self.gates)

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "n_params": self.n_params,
            "gates": [
                {"kind": g.kind, "qubits": list(g.qubits), "param_ref": g.param_ref, "scale": g.scale}
                for g in self.gates
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Circuit":
        gates = [Gate(g["kind"], tuple(g["qubits"]), g.get("param_ref"), g.get("scale", 1.0)) for g in data["gates"]]
        return cls(data["n_qubits"], gates, data["n_params"])

    def to_text(self) -> str:
        """OpenQASM-flavoured dump for eyeballing; not a stable format."""
        lines = [f"qreg q[{self.n_qubits}];  // {self.n_params} params"]
        for g in self.gates:
            args = ", ".join(f"q[{q}]" for q in g.qubits)
            if g.parametric:
                angle = f"theta[{g.param_ref}]" if g.scale == 1.0 else f"{g.scale:g}*theta[{g.param_ref}]"
                lines.append(f"{g.kind.lower()}({angle}) {args};")
            else:
                lines.append(f"{g.kind.lower()} {args};")
        return "\n".join(lines)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def circuit_depth(c: Circuit | Iterable[Gate], n_qubits: Optional[int] = None) -> int:
    """Greedy-layered depth under the CNOT + arbitrary one-qubit gate set.

    Runs of one-qubit gates on a wire fuse into one layer.  CZ counts as
    H-CNOT-H on its second qubit; composite gates occupy fixed-cost blocks.
    """
    gates = c.gates if isinstance(c, Circuit) else list(c)
    level: dict[int, int] = {}
    open_1q: dict[int, bool] = {}

    def one(q):
        if not open_1q.get(q, False):
            level[q] = level.get(q, 0) + 1
            open_1q[q] = True

    def block(qs, cost):
        t = max(level.get(q, 0) for q in qs) + cost
        for q in qs:
            level[q] = t
            open_1q[q] = False

    for g in gates:
        if len(g.qubits) == 1:
            one(g.qubits[0])
        elif g.kind == "CNOT":
            block(g.qubits, 1)
        elif g.kind == "CZ":
            one(g.qubits[1])
            block(g.qubits, 1)
            one(g.qubits[1])
        else:
            block(g.qubits, COMPOSITE_DEPTH[g.kind])
    return max(level.values(), default=0)


def truncate_to_depth(c: Circuit, max_depth: int) -> Circuit:
    """Longest gate prefix whose depth stays within ``max_depth``; unused trailing parameters are dropped."""
    lo, hi = 0, len(c.gates)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if circuit_depth(c.gates[:mid]) <= max_depth:
            lo = mid
        else:
            hi = mid - 1
    kept = c.gates[:lo]
    refs = [g.param_ref for g in kept if g.parametric]
    n_params = max(refs) + 1 if refs else 0
    meta = dict(c.metadata, truncated_at=max_depth) if lo < len(c.gates) else dict(c.metadata)
    return Circuit(c.n_qubits, kept, n_params, meta)
