"""Experiment configuration: YAML (or JSON) parsing, validation and expansion into sweep cells."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import yaml

from .circuit.ansatz import greedy_occupations
from .encode import Encoding
from .meas import LatticeTemplate
from .model import LATTICES, BoseHubbardParams, ModeSystem, rule_target
from .sim import SIM_MAX_QUBITS
from .vqe import ANSATZE, VqeCell, VqeConfig

SCHEMA_VERSION = 1
# n*log2(d) + 1 particles; the longer spelling is accepted as an alias
RULE_TARGET = "nk+1"
RULE_ALIASES = (RULE_TARGET, "paper-rule")
SWEEP_RATIOS = (1, 5, 10, 15, 20)


@dataclass
class Diagnostic:
    path: str
    message: str
    line: Optional[int] = None

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.path}: {self.message}"


class ConfigError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


def _line_map(node, path: str = "", out: Optional[dict] = None) -> dict[str, int]:
    """Map dotted config paths to 1-based source lines from a composed YAML node tree."""
    out = {} if out is None else out
    if node is None:
        return out
    out.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            sub = f"{path}.{key.value}" if path else str(key.value)
            out[sub] = key.start_mark.line + 1
            _line_map(value, sub, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            _line_map(item, f"{path}[{i}]", out)
    return out


def load_raw(path) -> tuple[dict, dict[str, int], bytes]:
    """Parsed document, path-to-line map and raw bytes.  JSON is read by the YAML loader too."""
    raw = Path(path).read_bytes()
    text = raw.decode("utf-8")
    try:
        data = yaml.safe_load(text)
        lines = _line_map(yaml.compose(text))
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError([Diagnostic("<document>", f"parse error: {getattr(exc, 'problem', exc)}", line)])
    if not isinstance(data, dict):
        raise ConfigError([Diagnostic("<document>", "top level must be a mapping", 1)])
    return data, lines, raw


@dataclass
class ModelSpec:
    id: str
    n_modes: int
    d: int
    lattice: str = "chain"
    encoding: str = "stdbinary"
    n_target: Any = RULE_TARGET
    ratios: Optional[list[float]] = None
    mu: float = 1.0
    omega_t: float = 1.0
    omega_int: Optional[float] = None
    occupations: Optional[list[int]] = None

    def system(self) -> ModeSystem:
        return ModeSystem.lattice_system(self.lattice, self.n_modes, self.d, self.encoding)

    def target(self) -> int:
        if self.n_target in RULE_ALIASES:
            return rule_target(self.n_modes, self.d)
        return int(self.n_target)

    def parameter_points(self) -> list[tuple[Optional[float], BoseHubbardParams]]:
        if self.ratios is not None:
            return [(float(r), BoseHubbardParams.from_ratio(float(r), self.mu, self.omega_t)) for r in self.ratios]
        omega_int = 1.0 if self.omega_int is None else self.omega_int
        ratio = omega_int / self.omega_t if self.omega_t else None
        return [(ratio, BoseHubbardParams(self.mu, self.omega_t, omega_int))]


@dataclass
class AnsatzSpec:
    name: str
    layers: Optional[int] = None
    depth_cap: Optional[int] = None
    max_layers: int = 50
    initial_params: Optional[str] = None


@dataclass
class ExperimentConfig:
    models: list[ModelSpec]
    ansatze: list[AnsatzSpec]
    eta: float = 10.0
    vqe: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: str = "results"
    meas: Optional[dict] = None
    schema_version: int = SCHEMA_VERSION

    def cells(self, seed: Optional[int] = None) -> list[VqeCell]:
        master = self.seed if seed is None else seed
        out = []
        for model in self.models:
            system = model.system()
            n_target = model.target()
            for ansatz in self.ansatze:
                for ratio, params in model.parameter_points():
                    cell = VqeCell(
                        model_id=model.id,
                        system=system,
                        params=params,
                        n_target=n_target,
                        ansatz=ansatz.name,
                        eta=self.eta,
                        layers=ansatz.layers,
                        ratio=ratio,
                        occupations=tuple(model.occupations) if model.occupations else None,
                        max_layers=ansatz.max_layers,
                    )
                    opts = dict(self.vqe)
                    opts.setdefault("initial_params", ansatz.initial_params or
                                    ("zeros" if ansatz.name.startswith("bempa") else "random"))
                    if ansatz.depth_cap is not None:
                        opts["max_depth"] = ansatz.depth_cap
                    opts["seed"] = cell_seed(master, cell.key)
                    cell.cfg = VqeConfig(**opts)
                    out.append(cell)
        return out


def cell_seed(master: int, key: str) -> int:
    digest = hashlib.sha256(f"{master}|{key}".encode()).digest()
    return int.from_bytes(digest[:4], "big") & 0x7FFFFFFF


def git_blob_hash(raw: bytes) -> str:
    return hashlib.sha1(b"blob %d\0" % len(raw) + raw).hexdigest()


_VQE_FIELDS = {f.name for f in fields(VqeConfig)} - {"seed", "max_depth"}


def parse_config(data: dict, lines: Optional[dict[str, int]] = None) -> ExperimentConfig:
    """Check the schema and invariants; every problem is collected before raising."""
    lines = lines or {}
    diags: list[Diagnostic] = []

    def err(path, msg):
        diags.append(Diagnostic(path, msg, lines.get(path)))

    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        err("schema_version", f"expected {SCHEMA_VERSION}, got {version!r}")
    known = {"schema_version", "seed", "models", "ansatze", "penalty", "vqe", "outputs", "meas"}
    for key in data:
        if key not in known:
            err(str(key), "unknown key")

    models = []
    model_paths = []
    for i, m in enumerate(data.get("models") or []):
        base = f"models[{i}]"
        if not isinstance(m, dict):
            err(base, "must be a mapping")
            continue
        spec = _model(m, base, err)
        if spec is not None:
            models.append(spec)
            model_paths.append(base)

    ansatze = []
    for i, a in enumerate(data.get("ansatze") or []):
        base = f"ansatze[{i}]"
        if isinstance(a, str):
            a = {"name": a}
        if not isinstance(a, dict) or "name" not in a:
            err(base, "needs a name")
            continue
        if a["name"] not in ANSATZE:
            err(f"{base}.name", f"unknown ansatz {a['name']!r}; choose from {', '.join(ANSATZE)}")
            continue
        extra = set(a) - {"name", "layers", "depth_cap", "max_layers", "initial_params"}
        for key in sorted(extra):
            err(f"{base}.{key}", "unknown key")
        for key in ("layers", "depth_cap", "max_layers"):
            if key in a and (not isinstance(a[key], int) or a[key] < 1):
                err(f"{base}.{key}", "must be a positive integer")
        ansatze.append(AnsatzSpec(**{k: v for k, v in a.items() if k not in extra}))

    penalty = data.get("penalty") or {}
    eta = penalty.get("eta", 10.0)
    if not isinstance(eta, (int, float)) or eta < 0:
        err("penalty.eta", "must be a non-negative number")
        eta = 10.0

    vqe = dict(data.get("vqe") or {})
    for key in list(vqe):
        if key not in _VQE_FIELDS:
            err(f"vqe.{key}", "unknown VQE setting")
            vqe.pop(key)
    try:
        VqeConfig(**vqe)
    except (TypeError, ValueError) as exc:
        err("vqe", str(exc))

    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        err("seed", "must be an integer")
        seed = 0

    for m, base in zip(models, model_paths):
        for a in ansatze:
            _check_pair(m, a, base, err)

    meas = data.get("meas")
    if meas is not None:
        _check_meas(meas, err)

    if diags:
        raise ConfigError(diags)
    outputs = data.get("outputs") or {}
    return ExperimentConfig(
        models=models, ansatze=ansatze, eta=float(eta), vqe=vqe, seed=seed,
        out_dir=str(outputs.get("dir", "results")), meas=meas,
    )


def _model(m: dict, base: str, err) -> Optional[ModelSpec]:
    allowed = {f.name for f in fields(ModelSpec)}
    bad = False
    for key in m:
        if key not in allowed:
            err(f"{base}.{key}", "unknown key")
            bad = True
    for key in ("id", "n_modes", "d"):
        if key not in m:
            err(base, f"missing required field {key!r}")
            bad = True
    if bad:
        return None
    spec = ModelSpec(**m)
    if not isinstance(spec.n_modes, int) or spec.n_modes < 1:
        err(f"{base}.n_modes", "must be a positive integer")
        return None
    if not isinstance(spec.d, int) or spec.d < 2:
        err(f"{base}.d", "truncation d must be an integer of at least 2")
        return None
    if spec.lattice not in LATTICES:
        err(f"{base}.lattice", f"unknown lattice {spec.lattice!r}; choose from {', '.join(LATTICES)}")
        return None
    if spec.lattice == "square" and math.isqrt(spec.n_modes) ** 2 != spec.n_modes:
        err(f"{base}.n_modes", "square lattice needs a square mode count")
        return None
    try:
        Encoding.parse(spec.encoding)
    except ValueError as exc:
        err(f"{base}.encoding", str(exc))
        return None
    if spec.n_target not in RULE_ALIASES:
        if not isinstance(spec.n_target, int):
            err(f"{base}.n_target", f"must be an integer or {RULE_TARGET!r}")
            return None
    target = spec.target()
    if not 0 <= target <= spec.n_modes * (spec.d - 1):
        err(f"{base}.n_target", f"sector empty: {target} particles exceed n(d-1) = {spec.n_modes * (spec.d - 1)}")
        return None
    if spec.ratios is not None and spec.omega_int is not None:
        err(f"{base}.ratios", "give either ratios or omega_int, not both")
    if spec.occupations is not None:
        occ = spec.occupations
        if len(occ) != spec.n_modes or any(not 0 <= o < spec.d for o in occ) or sum(occ) != target:
            err(f"{base}.occupations", f"must list {spec.n_modes} levels in [0, {spec.d}) summing to {target}")
    return spec


def _check_pair(m: ModelSpec, a: AnsatzSpec, base: str, err) -> None:
    """Model/ansatz compatibility; diagnostics point at the offending model field."""
    with_ = f"(model {m.id!r} with {a.name})"
    if a.name.startswith("bempa"):
        if m.d & (m.d - 1):
            err(f"{base}.d", f"BEMPA requires a power-of-two d, got d={m.d} {with_}")
        if Encoding.parse(m.encoding) is not Encoding.STD_BINARY:
            err(f"{base}.encoding", f"BEMPA runs in the standard-binary encoding {with_}")
    nq = ModeSystem.lattice_system(m.lattice, m.n_modes, m.d, m.encoding).n_qubits
    if nq > SIM_MAX_QUBITS:
        err(base, f"{nq} qubits exceed the simulator cap of {SIM_MAX_QUBITS} {with_}")


def _check_meas(meas, err) -> None:
    if not isinstance(meas, dict):
        err("meas", "must be a mapping")
        return
    for key in meas:
        if key not in ("d", "encodings", "lattices", "mu", "omega_t", "omega_int"):
            err(f"meas.{key}", "unknown key")
    for i, d in enumerate(meas.get("d", [])):
        if not isinstance(d, int) or d < 2:
            err(f"meas.d[{i}]", "must be an integer of at least 2")
    for i, e in enumerate(meas.get("encodings", [])):
        try:
            Encoding.parse(e)
        except ValueError as exc:
            err(f"meas.encodings[{i}]", str(exc))
    for i, t in enumerate(meas.get("lattices", [])):
        if not isinstance(t, dict) or t.get("kind") not in LATTICES or not isinstance(t.get("n_modes"), int):
            err(f"meas.lattices[{i}]", "needs kind (chain|ring|square) and integer n_modes")


def meas_settings(cfg: ExperimentConfig):
    """(params, templates, d list, encodings) for the encoding report, with defaults filled in."""
    from .meas import DEFAULT_TEMPLATES

    meas = cfg.meas or {}
    params = BoseHubbardParams(meas.get("mu", 1.0), meas.get("omega_t", 1.0), meas.get("omega_int", 1.0))
    templates = tuple(
        LatticeTemplate(t.get("label", f"{t['kind']}{t['n_modes']}"), t["kind"], t["n_modes"])
        for t in meas.get("lattices", [])
    ) or DEFAULT_TEMPLATES
    d_list = tuple(meas.get("d", (4, 8, 16)))
    encodings = tuple(meas.get("encodings", ("stdbinary", "gray", "unary")))
    return params, templates, d_list, encodings


def load_config(path) -> tuple[ExperimentConfig, bytes]:
    data, lines, raw = load_raw(path)
    return parse_config(data, lines), raw


def describe_cells(cfg: ExperimentConfig) -> list[str]:
    out = []
    for cell in cfg.cells():
        occ = cell.occupations or tuple(greedy_occupations(cell.system.n_modes, cell.system.d, cell.n_target))
        out.append(f"{cell.key}  qubits={cell.system.n_qubits}  occupations={list(occ)}")
    return out


def echo(cfg_raw: bytes) -> Any:
    return yaml.safe_load(cfg_raw.decode("utf-8"))


def dumps_manifest(manifest: dict) -> str:
    return json.dumps(manifest, indent=2, sort_keys=True, default=str)
