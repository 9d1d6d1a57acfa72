import json
from pathlib import Path

import pytest

from travwave.cli import main


def run(tmp_path, *argv):
    return main(["--out", str(tmp_path), *argv])


def test_regions_command(tmp_path):
    code = run(tmp_path, "regions", "--K", "1.25", "--c", "0.0161")
    assert code == 0
    payload = json.loads((tmp_path / "regions.json").read_text())
    assert payload["region"] == "D1"
    assert payload["zeros"]["u1"] < payload["zeros"]["u0"] < payload["zeros"]["u2"]
    manifest = json.loads((tmp_path / "regions_manifest.json").read_text())
    assert manifest["command"] == "regions"
    assert all(Path(o["path"]).exists() and o["bytes"] > 0 for o in manifest["outputs"])
    assert "tolerances" in manifest and "config_hash" in manifest


def test_shoot_ordering_above_cycle_speed(tmp_path):
    # mu_b > mu_f for c above the cycle speed
    d1 = tmp_path / "b"
    d2 = tmp_path / "f"
    d1.mkdir(), d2.mkdir()
    assert main(["--out", str(d1), "shoot", "--K", "1.25", "--c", "0.0163",
                 "--kind", "back"]) == 0
    assert main(["--out", str(d2), "shoot", "--K", "1.25", "--c", "0.0163",
                 "--kind", "front"]) == 0
    mu_b = json.loads((d1 / "shoot_back.json").read_text())["mu"]
    mu_f = json.loads((d2 / "shoot_front.json").read_text())["mu"]
    assert mu_b > mu_f
    header = (d1 / "orbit_back.csv").read_text().splitlines()[0]
    assert header == "z,u,w"


def test_deterministic_outputs(tmp_path):
    d1, d2 = tmp_path / "r1", tmp_path / "r2"
    d1.mkdir(), d2.mkdir()
    for d in (d1, d2):
        assert main(["--out", str(d), "shoot", "--K", "1.25", "--c", "0.0161",
                     "--kind", "back"]) == 0
    assert (d1 / "orbit_back.csv").read_bytes() == (d2 / "orbit_back.csv").read_bytes()


def test_validate_acn_passes(tmp_path):
    assert run(tmp_path, "validate-acn") == 0
    payload = json.loads((tmp_path / "validate_acn.json").read_text())
    assert payload["passed"]
    assert payload["max_integration_error"] < 1e-6
    assert payload["max_mu_error"] < 1e-6


def test_config_error_exit_2(tmp_path, capsys):
    assert main(["--config", "/nonexistent.json", "--out", str(tmp_path),
                 "regions", "--K", "1.25"]) == 2
    err = capsys.readouterr().err
    diag = json.loads(err.strip().splitlines()[-1])
    assert "error" in diag and "type" in diag


def test_solver_failure_exit_1(tmp_path, capsys):
    # homoclinic to u2 does not exist above the cycle speed
    code = run(tmp_path, "pulse", "--K", "1.25", "--c", "0.0163", "--which", "2")
    assert code == 1
    diag = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert diag["type"] == "RegionError"


def test_stability_command(tmp_path):
    assert run(tmp_path, "stability", "--rho", "33.05", "--n-k", "41",
               "--rho-min", "20", "--rho-max", "45", "--n-rho", "6") == 0
    disp = (tmp_path / "dispersion.csv").read_text().splitlines()
    assert disp[0] == "k,re_lambda_plus,im_lambda_plus,re_lambda_minus,im_lambda_minus"
    smap = (tmp_path / "stability_map.csv").read_text().splitlines()
    assert smap[0] == "rho,unstable,k1,k2"


def test_periodic_command(tmp_path):
    code = run(tmp_path, "periodic", "--K", "1.25", "--c", "0.0163", "--q", "0.0232")
    assert code == 0
    payload = json.loads((tmp_path / "periodic.json").read_text())
    assert payload["period"] > 0 and payload["residual"] < 1e-8


def test_custom_model_config(tmp_path):
    cfgfile = tmp_path / "model.json"
    cfgfile.write_text(json.dumps({"tau": 0.5, "viscosity": {"kind": "lee"}}))
    assert main(["--config", str(cfgfile), "--out", str(tmp_path),
                 "regions", "--K", "1.25", "--c", "0.0161"]) == 0
