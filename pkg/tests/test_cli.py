import csv
import json
import textwrap

import pytest

from bempa.cli import OUT_ENV, main
from bempa.config import ConfigError, cell_seed, git_blob_hash, load_config, parse_config

MINIMAL = """\
schema_version: 1
seed: 7
models:
  - id: chain2-d4
    n_modes: 2
    d: 4
    lattice: chain
    n_target: nk+1
    ratios: [1]
ansatze:
  - name: bempa
vqe:
  stop_at_reference: true
outputs:
  dir: unused
"""


def write(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return path


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_validate_ok(tmp_path, capsys):
    assert main(["validate", str(write(tmp_path, MINIMAL))]) == 0
    out = capsys.readouterr().out
    assert "ok: 1 cells" in out
    assert "chain2-d4|bempa|ratio=1|N=5|eta=10" in out


def test_validate_rejects_bempa_with_d3(tmp_path, capsys):
    cfg = MINIMAL.replace("d: 4", "d: 3").replace("nk+1", "2")
    assert main(["validate", str(write(tmp_path, cfg))]) == 2
    err = capsys.readouterr().err
    assert "power-of-two d" in err
    assert "line 6: models[0].d" in err


def test_validate_rejects_empty_sector(tmp_path, capsys):
    cfg = MINIMAL.replace("nk+1", "7")
    assert main(["validate", str(write(tmp_path, cfg))]) == 2
    assert "models[0].n_target: sector empty" in capsys.readouterr().err


def test_unknown_key_reports_line(tmp_path):
    cfg = MINIMAL.replace("    lattice: chain\n", "    lattice: chain\n    latice: ring\n")
    with pytest.raises(ConfigError) as exc:
        load_config(write(tmp_path, cfg))
    diag = exc.value.diagnostics[0]
    assert "latice" in str(diag) and diag.line == 8


def test_json_config_accepted(tmp_path):
    import yaml

    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(yaml.safe_load(MINIMAL)))
    cfg, _ = load_config(path)
    assert len(cfg.cells(cfg.seed)) == 1


def test_run_minimal_writes_one_row(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", str(write(tmp_path, MINIMAL)), "--out", str(out), "--workers", "1"]) == 0
    rows = read_rows(out / "results.csv")
    assert len(rows) == 1 and rows[0]["converged"] == "True"
    assert float(rows[0]["abs_error"]) <= 1e-8
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 7
    assert manifest["config_git_hash"] == git_blob_hash((tmp_path / "cfg.yaml").read_bytes())
    traj = json.loads((out / "trajectories.json").read_text())
    assert list(traj) == [manifest["cells"][0]["key"]]
    assert "1 cells, 1 converged, 0 failed" in capsys.readouterr().out


def test_rerun_is_byte_identical_except_wall_time(tmp_path):
    cfg = write(tmp_path, MINIMAL.replace("ratios: [1]", "ratios: [1, 5]"))
    runs = []
    for name in ("a", "b"):
        assert main(["run", str(cfg), "--out", str(tmp_path / name), "--workers", "2"]) == 0
        rows = read_rows(tmp_path / name / "results.csv")
        runs.append([{k: v for k, v in r.items() if k != "wall_time_s"} for r in rows])
    assert runs[0] == runs[1] and len(runs[0]) == 2


def test_json_format_and_env_override(tmp_path, monkeypatch):
    target = tmp_path / "from-env"
    monkeypatch.setenv(OUT_ENV, str(target))
    assert main(["run", str(write(tmp_path, MINIMAL)), "--format", "json", "--workers", "1"]) == 0
    rows = json.loads((target / "results.json").read_text())
    assert rows[0]["model_id"] == "chain2-d4"


def test_failed_cell_exits_one_and_keeps_rows(tmp_path):
    # one RyCx layer on 4 qubits has depth 4, so this cell fails at run time
    cfg = MINIMAL.replace("  - name: bempa\n", "  - name: bempa\n  - name: ry_cx\n    layers: 1\n    depth_cap: 3\n")
    out = tmp_path / "out"
    assert main(["run", str(write(tmp_path, cfg)), "--out", str(out), "--workers", "1"]) == 1
    rows = read_rows(out / "results.csv")
    assert len(rows) == 2
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["errors"]


def test_run_without_cells_is_a_config_error(tmp_path, capsys):
    cfg = "schema_version: 1\nmodels: []\nansatze: []\n"
    assert main(["run", str(write(tmp_path, cfg)), "--out", str(tmp_path / "o")]) == 2


def test_missing_file(tmp_path):
    assert main(["validate", str(tmp_path / "nope.yaml")]) == 2


def test_per_cell_seeds_are_stable():
    assert cell_seed(7, "a") == cell_seed(7, "a")
    assert cell_seed(7, "a") != cell_seed(7, "b")
    assert 0 <= cell_seed(123, "x") < 2**31


def test_rule_target_and_ratio_expansion():
    raw = {
        "schema_version": 1,
        "models": [{"id": "m", "n_modes": 3, "d": 8, "lattice": "ring", "n_target": "nk+1",
                    "ratios": [1, 20]}],
        "ansatze": [{"name": "xxyy_ry", "layers": 2}],
    }
    cfg = parse_config(raw)
    cells = cfg.cells(0)
    assert [c.n_target for c in cells] == [10, 10]
    assert [c.params.omega_int for c in cells] == [1.0, 20.0]
    assert all(c.params.mu == 1.0 and c.params.omega_t == 1.0 for c in cells)


def test_decompose_b(capsys):
    assert main(["decompose-b", "--alpha", "0.7"]) == 0
    out = capsys.readouterr().out
    assert "depth: 13" in out
    dist = float(out.strip().split()[-1])
    assert dist < 1e-10


def test_report_meas(tmp_path):
    cfg = """\
    schema_version: 1
    models: []
    ansatze: []
    meas:
      lattices:
        - {label: two-mode, kind: chain, n_modes: 2}
      d: [4]
      encodings: [stdbinary, gray]
    """
    out = tmp_path / "m"
    assert main(["report-meas", str(write(tmp_path, cfg)), "--out", str(out)]) == 0
    rows = read_rows(out / "meas_report.csv")
    assert [r["encoding"] for r in rows] == ["stdbinary", "gray"]
    assert float(rows[1]["r_hat"]) > float(rows[0]["r_hat"])


def test_rule_target_alias():
    raw = {"schema_version": 1, "models": [{"id": "m", "n_modes": 2, "d": 4, "n_target": "paper-rule"}],
           "ansatze": ["bempa"]}
    assert parse_config(raw).cells(0)[0].n_target == 5
