import json
import subprocess
import sys

import numpy as np
import pytest

from localpurity.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from localpurity.serialization import grid_from_csv, sha256

MAP_CONFIG = {
    "schema": 1,
    "profile": {"family": "bspline", "m": 3},
    "field": {"dim": 1, "regulator": "mass"},
    "grid": {"x": {"min": 0.1, "max": 10.0, "n": 3}, "y": [0.1, 1.0]},
}

HARVEST_CONFIG = {
    "schema": 1,
    "field": {"dim": 3},
    "detectors": {
        "A": {"gap": 2.0, "center": [0.0, 0.0, 0.0]},
        "B": {"gap": 2.0, "center": [5.0, 0.0, 0.0]},
    },
}


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj, indent=2))
    return str(path)


def run(tmp_path, command, cfg, *extra):
    out = tmp_path / f"out_{command}"
    code = main([command, "--config", write(tmp_path, f"{command}.json", cfg), "--out", str(out), *extra])
    return code, out


def test_purity_map_outputs(tmp_path):
    code, out = run(tmp_path, "purity-map", MAP_CONFIG, "--workers", "1")
    assert code == EXIT_OK
    grid = grid_from_csv((out / "purity_map.csv").read_text())
    assert grid.values.shape == (2, 3)
    assert np.all((grid.values > 0) & (grid.values <= 1))
    # purity falls with temperature along each row
    assert np.all(np.diff(grid.values, axis=1) < 0)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "purity-map"
    assert manifest["outputs"]["purity_map.csv"] == sha256((out / "purity_map.csv").read_text())


def test_purity_map_independent_of_workers(tmp_path):
    _, one = run(tmp_path, "purity-map", MAP_CONFIG, "--workers", "1")
    a = (one / "purity_map.csv").read_bytes()
    out2 = tmp_path / "w2"
    assert main(["purity-map", "--config", str(tmp_path / "purity-map.json"), "--out", str(out2),
                 "--workers", "2"]) == EXIT_OK
    assert (out2 / "purity_map.csv").read_bytes() == a
    assert (out2 / "purity_map.json").read_bytes() == (one / "purity_map.json").read_bytes()


def test_purity_map_failed_cells_exit_numerical(tmp_path):
    cfg = dict(MAP_CONFIG, profile={"family": "bspline", "m": 1})
    code, out = run(tmp_path, "purity-map", cfg, "--workers", "1")
    assert code == EXIT_NUMERICAL
    data = json.loads((out / "purity_map.json").read_text())
    assert data["errors"] and data["purity"][0][0] is None


def test_purity_map_needs_regulator(tmp_path, capsys):
    cfg = dict(MAP_CONFIG, field={"dim": 1, "regulator": "none"})
    code, _ = run(tmp_path, "purity-map", cfg)
    assert code == EXIT_CONFIG
    assert "regulator" in capsys.readouterr().err


def test_config_error_has_line_number(tmp_path, capsys):
    text = '{\n  "schema": 1,\n  "profile": {"family": "bspline", "m": 3},\n  "field": {\n    "dim": 1,\n' \
           '    "regulator": "mass",\n    "beta": -1\n  },\n  "grid": {"x": [1.0], "y": [1.0]}\n}\n'
    code, _ = run(tmp_path, "purity-map", text)
    assert code == EXIT_CONFIG
    assert "purity-map.json:7:" in capsys.readouterr().err


def test_bad_json_and_missing_config(tmp_path, capsys):
    code, _ = run(tmp_path, "purity-map", '{"schema": 1,,}')
    assert code == EXIT_CONFIG
    assert main(["purity-map", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG
    assert main(["purity-map", "--config", write(tmp_path, "x.json", MAP_CONFIG), "--workers", "0"]) == EXIT_CONFIG


def test_purity_curve(tmp_path):
    cfg = {
        "schema": 1,
        "profile": {"family": "ball3d", "m": 2, "ell": 1.0},
        "field": {"dim": 3},
        "temperatures": [0.01, 1.0],
    }
    code, out = run(tmp_path, "purity-curve", cfg, "--workers", "1")
    assert code == EXIT_OK
    grid = grid_from_csv((out / "purity_curve.csv").read_text())
    assert grid.values.shape == (1, 2) and grid.values[0, 0] > grid.values[0, 1]


def test_min_mix_ladder(tmp_path):
    cfg = {"schema": 1, "ell": 1.0, "beta": 1.0, "ladder": [[5, 5], [5, 15], [5, 45]]}
    code, out = run(tmp_path, "min-mix", cfg)
    assert code == EXIT_OK
    data = json.loads((out / "min_mix.json").read_text())
    assert data["strictly_decreasing"] is True
    assert data["best"]["kappa_ell_over_pi"] == 45


@pytest.mark.parametrize("ladder", [[], [[2, 5]], [["a", 5]]])
def test_min_mix_bad_ladder(tmp_path, ladder):
    code, _ = run(tmp_path, "min-mix", {"schema": 1, "ladder": ladder})
    assert code == EXIT_CONFIG


def test_min_mix_uv_divergence_is_numerical(tmp_path):
    code, out = run(tmp_path, "min-mix", {"schema": 1, "beta": 1.0, "ladder": [[3, 5]]})
    assert code == EXIT_NUMERICAL
    assert json.loads((out / "min_mix.json").read_text())["table"][0]["u"] is None


def test_harvest_sweep(tmp_path):
    cfg = dict(HARVEST_CONFIG, lambda_ladder=[0.5, 1.0, 2.0])
    code, out = run(tmp_path, "harvest", cfg)
    assert code == EXIT_OK
    data = json.loads((out / "harvest.json").read_text())
    assert data["harvests"] is True
    z_c = data["z_c"]
    sweep = {round(r["z"] / z_c, 6): r["negativity"] for r in data["z_sweep"]}
    assert sweep[0.0] == pytest.approx(z_c)
    assert sweep[0.5] == pytest.approx(0.5 * z_c, rel=1e-12)
    assert sweep[1.0] == 0.0 and sweep[2.0] == 0.0
    zl = [r["z_c"] for r in data["lambda_ladder"]]
    assert zl[1] == pytest.approx(z_c, rel=1e-12)
    assert zl[2] / zl[0] == pytest.approx(16.0, rel=1e-12)
    assert abs(data["negativity"]["difference"]) < 1e-9


def test_threshold_command(tmp_path):
    code, out = run(tmp_path, "threshold", dict(HARVEST_CONFIG, z_values=[1e-4, 4e-4]))
    assert code == EXIT_OK
    data = json.loads((out / "threshold.json").read_text())
    lam = [s["lambda_c"] for s in data["samples"]]
    assert lam[1] / lam[0] == pytest.approx(2.0, rel=1e-12)


def test_threshold_no_harvest(tmp_path):
    cfg = json.loads(json.dumps(HARVEST_CONFIG))
    for d in cfg["detectors"].values():
        d["gap"] = 1.0
    code, out = run(tmp_path, "threshold", cfg)
    assert code == EXIT_OK
    data = json.loads((out / "threshold.json").read_text())
    assert data["harvests"] is False and data["samples"] == []


def test_harvest_bad_detector(tmp_path):
    cfg = json.loads(json.dumps(HARVEST_CONFIG))
    cfg["detectors"]["B"]["center"] = [1.0]
    code, _ = run(tmp_path, "harvest", cfg)
    assert code == EXIT_CONFIG
    cfg["detectors"]["B"] = {"kind": "oscillator", "center": [5.0, 0.0, 0.0]}
    code, _ = run(tmp_path, "harvest", cfg)
    assert code == EXIT_CONFIG


def test_oracle_command_small(tmp_path):
    cfg = {"schema": 1, "setup": {"n_modes": 4, "steps": 64, "cavity_length": 12.0, "separation": 4.0}}
    code, out = run(tmp_path, "oracle", cfg)
    assert code == EXIT_OK
    data = json.loads((out / "fock_cavity_golden.json").read_text())
    assert set(data["results"]) == {"qubit", "oscillator"}


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "localpurity", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "localpurity" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "localpurity", "harvest"], capture_output=True, text=True)
    assert proc.returncode == 2
