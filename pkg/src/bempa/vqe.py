"""VQE loop, depth-capped BEMPA growth and the sweep runner."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import sim
from .circuit.ansatz import PENALTY_KINDS, build_bempa, build_penalty_ansatz, greedy_occupations
from .circuit.ir import Circuit, circuit_depth, truncate_to_depth
from .encode import Encoding, codeword
from .model import (
    BoseHubbardParams,
    ModeSystem,
    SectorSpec,
    build_bh_hamiltonian,
    build_penalty,
    exact_sector_ground_energy,
)
from .optimize import bfgs_minimize
from .pauli import PauliSum

log = logging.getLogger(__name__)

ANSATZE = ("bempa", "bempa_exhaustive", "ry_cx", "rx_cz_ry", "xxyy_ry")
_PENALTY_NAMES = dict(zip(("ry_cx", "rx_cz_ry", "xxyy_ry"), PENALTY_KINDS))

CSV_COLUMNS = (
    "model_id", "ansatz", "encoding", "n_modes", "d", "n_target", "ratio", "eta", "layers", "depth",
    "iterations", "function_evals", "best_energy", "reference_energy", "abs_error", "converged",
    "wall_time_s", "seed",
)


@dataclass
class VqeConfig:
    step_tolerance: float = 1e-8
    grad_norm_tolerance: float = 1e-10
    convergence_threshold: float = 1e-8
    max_iterations: int = 1000
    max_depth: Optional[int] = None
    initial_params: str = "zeros"
    seed: int = 0
    gradient: str = "fd"
    # stop as soon as the reference is matched instead of running BFGS to its own tolerances
    stop_at_reference: bool = False

    def __post_init__(self):
        for name in ("step_tolerance", "grad_norm_tolerance", "convergence_threshold"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be positive")
        if self.initial_params not in ("zeros", "random"):
            raise ValueError(f"initial_params must be 'zeros' or 'random', got {self.initial_params!r}")
        if self.gradient not in ("fd", "adjoint"):
            raise ValueError(f"gradient must be 'fd' or 'adjoint', got {self.gradient!r}")

    def initial_vector(self, n: int) -> np.ndarray:
        if self.initial_params == "zeros":
            return np.zeros(n)
        return np.random.default_rng(self.seed).uniform(-0.1, 0.1, n)


@dataclass
class VqeResult:
    best_energy: float
    best_params: np.ndarray
    energy_trajectory: list[float]
    leakage_trajectory: list[float]
    iterations: int
    function_evals: int
    converged: bool
    wall_time: float
    gradient_evals: int = 0
    iterations_to_converge: Optional[int] = None
    status: str = ""
    depth: int = 0
    layers: Optional[int] = None
    reference_energy: Optional[float] = None

    @property
    def abs_error(self) -> float:
        if self.reference_energy is None:
            return math.nan
        return abs(self.best_energy - self.reference_energy)

    def to_json(self) -> dict:
        out = asdict(self)
        out["best_params"] = [float(v) for v in self.best_params]
        return out


def _first_within(traj: Sequence[float], ref: Optional[float], thr: float) -> Optional[int]:
    if ref is None:
        return None
    for k, e in enumerate(traj):
        if abs(e - ref) <= thr:
            return k
    return None


def run_vqe(
    h: PauliSum,
    ansatz: Circuit,
    initial_state: int = 0,
    reference_energy: Optional[float] = None,
    cfg: Optional[VqeConfig] = None,
    sector: Optional[tuple[ModeSystem, int]] = None,
    x0: Optional[np.ndarray] = None,
) -> VqeResult:
    """Minimize <psi(theta)|h|psi(theta)> over the ansatz parameters with BFGS.

    ``sector=(system, n_target)`` enables the leakage trajectory; without it the
    entries are NaN.  ``x0`` overrides the configured initial parameters.
    """
    cfg = cfg or VqeConfig()
    if h.n_qubits != ansatz.n_qubits:
        raise ValueError(f"Hamiltonian has {h.n_qubits} qubits, ansatz {ansatz.n_qubits}")
    x0 = cfg.initial_vector(ansatz.n_params) if x0 is None else np.asarray(x0, dtype=float)
    leakage: list[float] = []

    def fun(theta):
        return sim.energy(ansatz, h, theta, initial_state)

    def grad(theta):
        return sim.gradient(ansatz, h, theta, initial_state, method=cfg.gradient)

    def record(theta):
        if sector is None:
            leakage.append(math.nan)
        else:
            state = sim.run_circuit(ansatz, theta, initial_state)
            leakage.append(sim.sector_leakage(state, sector[0], sector[1]))

    def callback(k, theta, f):
        record(theta)
        return (
            cfg.stop_at_reference
            and reference_energy is not None
            and abs(f - reference_energy) <= cfg.convergence_threshold
        )

    start = time.perf_counter()
    x, trace = bfgs_minimize(fun, grad, x0, cfg, callback=callback)
    wall = time.perf_counter() - start
    best = trace.fun
    converged = trace.converged
    if reference_energy is not None:
        converged = abs(best - reference_energy) <= cfg.convergence_threshold
    return VqeResult(
        best_energy=best,
        best_params=x,
        energy_trajectory=list(trace.fvals),
        leakage_trajectory=leakage,
        iterations=trace.nit,
        function_evals=trace.nfev,
        converged=converged,
        wall_time=wall,
        gradient_evals=trace.ngev,
        iterations_to_converge=_first_within(trace.fvals, reference_energy, cfg.convergence_threshold),
        status=trace.status,
        depth=circuit_depth(ansatz),
        layers=ansatz.metadata.get("layers"),
        reference_energy=reference_energy,
    )


def grow_vqe(
    h: PauliSum,
    builder: Callable[[int], tuple[Circuit, int]],
    reference_energy: Optional[float] = None,
    cfg: Optional[VqeConfig] = None,
    sector: Optional[tuple[ModeSystem, int]] = None,
    max_layers: int = 50,
) -> VqeResult:
    """Add ansatz layers one at a time, warm-starting each stage from the last optimum.

    New parameters start at zero, where A and B gates are the identity, so the
    energy carries over between stages and the joined trajectory stays
    non-increasing.  Growth stops once the reference is matched, the circuit
    reaches ``cfg.max_depth`` (the final stage is cut at the cap), or
    ``max_layers`` is reached.
    """
    cfg = cfg or VqeConfig()
    total: Optional[VqeResult] = None
    params = np.zeros(0)
    for layers in range(1, max_layers + 1):
        circuit, initial = builder(layers)
        capped = cfg.max_depth is not None and circuit_depth(circuit) > cfg.max_depth
        if capped:
            # the last stage fills the remaining depth with a partial layer
            circuit = truncate_to_depth(circuit, cfg.max_depth)
            if circuit.n_params <= params.size:
                if total is None:
                    raise ValueError(f"no gate fits within max_depth={cfg.max_depth}")
                break
        x0 = np.concatenate([params, np.zeros(circuit.n_params - params.size)])
        stage = run_vqe(h, circuit, initial, reference_energy, cfg, sector, x0=x0)
        params = stage.best_params
        if total is None:
            total = stage
        else:
            # the stage starts where the previous one ended; drop the repeated point
            total = VqeResult(
                best_energy=stage.best_energy,
                best_params=stage.best_params,
                energy_trajectory=total.energy_trajectory + stage.energy_trajectory[1:],
                leakage_trajectory=total.leakage_trajectory + stage.leakage_trajectory[1:],
                iterations=total.iterations + stage.iterations,
                function_evals=total.function_evals + stage.function_evals,
                converged=stage.converged,
                wall_time=total.wall_time + stage.wall_time,
                gradient_evals=total.gradient_evals + stage.gradient_evals,
                status=stage.status,
                depth=stage.depth,
                layers=layers,
                reference_energy=reference_energy,
            )
        if capped or (reference_energy is not None and total.converged):
            break
    total.layers = total.layers if total.layers is not None else 1
    total.iterations_to_converge = _first_within(
        total.energy_trajectory, reference_energy, cfg.convergence_threshold
    )
    return total


def occupation_index(system: ModeSystem, occupations: Sequence[int]) -> int:
    """Basis index of the product state with the given occupations, in the system's encoding."""
    layout = system.layout
    index = 0
    for mode, occ in enumerate(occupations):
        word = codeword(system.d, occ, system.encoding)
        for j, q in enumerate(layout.mode_qubits(mode)):
            if (word >> j) & 1:
                index |= 1 << q
    return index


@dataclass
class VqeCell:
    """One sweep cell: a model, an ansatz and the VQE settings."""

    model_id: str
    system: ModeSystem
    params: BoseHubbardParams
    n_target: int
    ansatz: str
    eta: float = 10.0
    layers: Optional[int] = None
    ratio: Optional[float] = None
    occupations: Optional[tuple[int, ...]] = None
    cfg: VqeConfig = field(default_factory=VqeConfig)
    max_layers: int = 50

    @property
    def key(self) -> str:
        ratio = "na" if self.ratio is None else f"{self.ratio:g}"
        return f"{self.model_id}|{self.ansatz}|ratio={ratio}|N={self.n_target}|eta={self.eta:g}"


def bempa_builder(system: ModeSystem, occupations: Sequence[int], variant: str = "standard"):
    if system.encoding is not Encoding.STD_BINARY:
        raise ValueError("BEMPA acts on standard-binary codewords")
    if system.d & (system.d - 1):
        raise ValueError(f"BEMPA needs a power-of-two d, got d={system.d}")

    def build(layers: int):
        return build_bempa(system.layout, occupations, layers, variant=variant, d=system.d)

    return build


def penalty_builder(system: ModeSystem, kind: str, initial: int):
    def build(layers: int):
        return build_penalty_ansatz(kind, system.n_qubits, layers), initial

    return build


def run_cell(cell: VqeCell) -> tuple[dict, VqeResult]:
    """Build the model, run the cell's ansatz and return its CSV row and full result."""
    if cell.ansatz not in ANSATZE:
        raise ValueError(f"unknown ansatz {cell.ansatz!r}; choose from {ANSATZE}")
    system = cell.system
    spec = SectorSpec(cell.n_target, cell.eta)
    spec.validate(system)
    h = build_bh_hamiltonian(cell.params, system) + build_penalty(spec, system)
    reference = exact_sector_ground_energy(cell.params, system, cell.n_target)
    occ = list(cell.occupations or greedy_occupations(system.n_modes, system.d, cell.n_target))
    if sum(occ) != cell.n_target:
        raise ValueError(f"occupations {occ} do not sum to {cell.n_target}")
    sector = (system, cell.n_target)
    if cell.ansatz.startswith("bempa"):
        variant = "exhaustive" if cell.ansatz == "bempa_exhaustive" else "standard"
        build = bempa_builder(system, occ, variant)
    else:
        build = penalty_builder(system, _PENALTY_NAMES[cell.ansatz], occupation_index(system, occ))
    if cell.layers is not None:
        circuit, initial = build(cell.layers)
        if cell.cfg.max_depth is not None and circuit_depth(circuit) > cell.cfg.max_depth:
            raise ValueError(f"{cell.layers} layers exceed max_depth={cell.cfg.max_depth}")
        result = run_vqe(h, circuit, initial, reference, cell.cfg, sector)
    elif cell.ansatz.startswith("bempa"):
        result = grow_vqe(h, build, reference, cell.cfg, sector, cell.max_layers)
    else:
        circuit, initial = _fill_depth(build, cell.cfg.max_depth, cell.max_layers)
        result = run_vqe(h, circuit, initial, reference, cell.cfg, sector)
    return result_row(cell, result), result


def _fill_depth(build, max_depth: Optional[int], max_layers: int) -> tuple[Circuit, int]:
    """Enough layers to reach ``max_depth``, cut back to the cap at gate granularity."""
    if max_depth is None:
        return build(max_layers)
    for layers in range(1, max_layers + 1):
        circuit, initial = build(layers)
        if circuit_depth(circuit) >= max_depth:
            break
    circuit = truncate_to_depth(circuit, max_depth)
    if circuit.n_params == 0:
        raise ValueError(f"no gate fits within max_depth={max_depth}")
    return circuit, initial


def result_row(cell: VqeCell, result: VqeResult) -> dict:
    return {
        "model_id": cell.model_id,
        "ansatz": cell.ansatz,
        "encoding": cell.system.encoding.value,
        "n_modes": cell.system.n_modes,
        "d": cell.system.d,
        "n_target": cell.n_target,
        "ratio": "" if cell.ratio is None else cell.ratio,
        "eta": cell.eta,
        "layers": result.layers,
        "depth": result.depth,
        "iterations": result.iterations,
        "function_evals": result.function_evals,
        "best_energy": repr(float(result.best_energy)),
        "reference_energy": repr(float(result.reference_energy)),
        "abs_error": repr(float(result.abs_error)),
        "converged": result.converged,
        "wall_time_s": round(result.wall_time, 6),
        "seed": cell.cfg.seed,
    }


def failed_row(cell: VqeCell, error: BaseException) -> dict:
    row = {col: "" for col in CSV_COLUMNS}
    row.update(
        model_id=cell.model_id, ansatz=cell.ansatz, encoding=cell.system.encoding.value,
        n_modes=cell.system.n_modes, d=cell.system.d, n_target=cell.n_target,
        ratio="" if cell.ratio is None else cell.ratio, eta=cell.eta, converged=False, seed=cell.cfg.seed,
    )
    row["error"] = f"{type(error).__name__}: {error}"
    return row


def _safe_run(cell: VqeCell):
    try:
        row, result = run_cell(cell)
        return cell.key, row, result.to_json(), None
    except Exception as exc:  # recorded per row, the sweep carries on
        log.warning("cell %s failed: %s", cell.key, exc)
        return cell.key, failed_row(cell, exc), None, f"{type(exc).__name__}: {exc}"


@dataclass
class SweepOutcome:
    rows: list[dict]
    results: dict[str, Optional[dict]]
    errors: dict[str, str]

    @property
    def ok(self) -> bool:
        return not self.errors


def sweep(cells: Sequence[VqeCell], workers: int = 1) -> SweepOutcome:
    """Run every cell; rows come back in input order whatever the worker count."""
    keys = [c.key for c in cells]
    if len(set(keys)) != len(keys):
        raise ValueError("sweep cells must have distinct row keys")
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_safe_run, cells))
    else:
        outcomes = [_safe_run(c) for c in cells]
    by_key = {key: (row, res, err) for key, row, res, err in outcomes}
    rows, results, errors = [], {}, {}
    for key in keys:
        row, res, err = by_key[key]
        rows.append(row)
        results[key] = res
        if err is not None:
            errors[key] = err
    return SweepOutcome(rows, results, errors)
