import json

import numpy as np
import pytest
import scipy.io

from thermomms.cli import EXIT_CONFIG, EXIT_OK, main
from thermomms.io import export_model, export_reduced, load_reduced
from thermomms.reduction import reduce_two_step
from thermomms.scenario import bundled_config, load_raw, parse_config, validate

SMALL = """
name = "small"
[geometry]
h = 0.042
l = 0.140
t = 0.001
[mesh]
nx = 4
ny = 2
[material]
E = 162.4e9
nu = 0.28
rho = 2330.0
alpha = 2.54e-6
kappa = 145.0
cE_per_rho = 711.0
T0_celsius = 25.0
[bc]
structural = ["left_edge"]
thermal = ["left_edge"]
[reduction]
n_s = 4
n_t = 3
methods = {methods}
convergence = [[2, 2], [4, 3]]
[[excitation.thermal]]
node_set = "right_edge"
amplitude = 100.0
[[excitation.structural]]
node_set = "right_mid"
direction = "y"
amplitude = 3000.0
omega = 10.0
kind = "sinusoid"
[integrator]
t_end = 1e-4
n_samples = 5
h = 1e-7
snapshots = [1e-4]
"""


def write_cfg(tmp_path, methods='["uncoupled", "two-step", "superposition"]', name="c.toml"):
    p = tmp_path / name
    p.write_text(SMALL.replace("{methods}", methods))
    return p


def test_bundled_configs_parse():
    for name in ("plate_macro", "plate_micro"):
        assert validate(bundled_config(name)) == ["ok: N_s=280, N_T=140, state dimension 700"]
    cfg = parse_config(load_raw(bundled_config("plate_macro")))
    assert cfg.material.T0 == pytest.approx(298.15)


def test_validate_diagnostics(tmp_path):
    p = write_cfg(tmp_path)
    text = p.read_text()
    p.write_text(text.replace("kappa = 145.0\n", ""))
    assert validate(p) == ["missing field material.kappa"]
    p.write_text(text.replace("n_s = 4", "n_s = 99"))
    assert validate(p) == ["reduction n_s=99 exceeds N_s=24"]
    p.write_text(text.replace('"right_mid"', '"nowhere"'))
    assert "nowhere" in validate(p)[0]


def test_unknown_method_exit_code(tmp_path, capsys):
    p = write_cfg(tmp_path, methods='["modal"]')
    assert main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "reduction.methods" in capsys.readouterr().err
    assert main(["validate", "--config", str(tmp_path / "missing.toml")]) == EXIT_CONFIG


def test_run_writes_artifacts(tmp_path):
    p = write_cfg(tmp_path)
    out = tmp_path / "o"
    assert main(["run", "--config", str(p), "--out", str(out), "--export"]) == EXIT_OK
    for name in ("eigen_errors.csv", "spectra.csv", "transient_max.csv", "timings.json",
                 "manifest.json"):
        assert (out / name).exists(), name
    assert sorted(f.name for f in (out / "fields").iterdir())[0].startswith("diff_")
    timings = json.loads((out / "timings.json").read_text())
    secs = [timings["seconds"][k] for k in timings["order"]]
    assert secs == sorted(secs)
    assert timings["table1_pattern"] in ("pass", "warn")
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["config_sha256"]) == 64
    A, B, T, meta = load_reduced(out / "reduced" / "two-step")
    assert meta["method"] == "two-step" and A.shape == (11, 11) and T.shape == (60, 11)


def test_fixed_step_runs_are_bitwise_identical(tmp_path):
    p = write_cfg(tmp_path, methods='["uncoupled", "two-step"]')
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert main(["run", "--config", str(p), "--out", str(out), "--fixed-step"]) == EXIT_OK
    for name in ("eigen_errors.csv", "spectra.csv", "transient_max.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_assemble_and_eig_subcommands(tmp_path):
    p = write_cfg(tmp_path)
    assert main(["assemble", "--config", str(p), "--out", str(tmp_path)]) == EXIT_OK
    K = scipy.io.mmread(str(tmp_path / "matrices" / "K_ss.mtx"))
    assert K.shape == (24, 24)
    assert abs(K - K.T).max() == 0
    assert main(["eig", "--config", str(p), "--out", str(tmp_path)]) == EXIT_OK
    rows = (tmp_path / "full_eigenvalues.csv").read_text().splitlines()
    assert len(rows) == 1 + 2 * 24 + 12
    assert sum(r.endswith(",thermal") for r in rows) == 12


def test_model_export_roundtrip(tmp_path, small_plate):
    _, _, model, _ = small_plate
    export_model(model, tmp_path / "m")
    KsT = scipy.io.mmread(str(tmp_path / "m" / "K_sT.mtx"))
    np.testing.assert_array_equal(KsT.toarray(), model.K_sT.toarray())
    r = reduce_two_step(model, 5, 4)
    export_reduced(r, tmp_path / "r")
    A, B, T, meta = load_reduced(tmp_path / "r")
    np.testing.assert_array_equal(A, r.A)
    np.testing.assert_array_equal(B, r.B)
    assert meta["bases"]["thermal"]["metric"] == "D_bar_TT"
