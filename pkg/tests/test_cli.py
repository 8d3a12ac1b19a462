import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from bubblelab import __version__, golden
from bubblelab import torus as T
from bubblelab.cli import ConfigError, RunConfig, build_parser, build_config, main, parse_config_file


def run(tmp_path, *argv):
    return main([argv[0], "--out", str(tmp_path), *argv[1:]])


def test_config_file_parsing(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# a comment\nn = 256\nalphas = 1.04, 1.02  # trailing\nprecondition = false\n\nmax-iters=10\n")
    vals = parse_config_file(f)
    assert vals == {"n": 256, "alphas": [1.04, 1.02], "precondition": False, "max_iters": 10}


def test_config_rejects_unknown_and_malformed(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("n = 256\ncolour = blue\n")
    with pytest.raises(ConfigError, match="unknown key 'colour'"):
        parse_config_file(f)
    f.write_text("n 256\n")
    with pytest.raises(ConfigError, match="expected key=value"):
        parse_config_file(f)
    f.write_text("colour = blue\n")
    assert run(tmp_path, "greens-check", "--config", str(f)) == 2


def test_flags_override_config_file(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("alpha = 1.04\nn = 256\n")
    args = build_parser().parse_args(["solve", "--config", str(f), "--alpha", "1.02"])
    cfg = build_config(args)
    assert cfg.alpha == 1.02 and cfg.n == 256


@pytest.mark.parametrize("field,value", [("alpha", 1.0), ("alpha", 0.9), ("n", 100), ("threads", 0),
                                         ("tol_residual", -1.0), ("lambdas", [3.0]), ("method", "newton")])
def test_runconfig_validation(field, value):
    with pytest.raises(ConfigError):
        RunConfig(**{field: value}).validate()


def test_invalid_alpha_is_usage_error(tmp_path):
    assert run(tmp_path, "solve", "--alpha", "1.0") == 2
    assert run(tmp_path, "solve", "--alpha", "abc") == 2
    assert run(tmp_path, "no-such-command") == 2


def test_threads_env_override(monkeypatch):
    monkeypatch.setenv("ABL_THREADS", "3")
    assert build_config(build_parser().parse_args(["greens-check", "--threads", "1"])).threads == 3
    monkeypatch.setenv("ABL_THREADS", "0")
    assert main(["greens-check"]) == 2


def test_greens_check_passes_and_reports_json(tmp_path, capsys):
    assert run(tmp_path, "greens-check", "--json") == 0
    report = json.loads(capsys.readouterr().out)
    assert report["version"] == __version__ and report["seed"] == 0
    assert {c["name"] for c in report["checks"]} == {
        "jay_equals_minus_2pi", "grad_y_J_at_origin", "harmonicity_of_grad_y_J", "weak_pde_residual"}
    assert json.loads((tmp_path / "greens_check.json").read_text()) == report


def test_greens_check_fails_on_coarse_ewald(tmp_path, capsys, caplog):
    assert run(tmp_path, "greens-check", "--ewald-tol", "0.5") == 1
    assert "checks failed" in capsys.readouterr().err
    assert any(r.getMessage().startswith("FAIL jay_equals_minus_2pi") for r in caplog.records)


def test_missing_golden_is_environment_error(tmp_path, capsys):
    code = run(tmp_path, "verify-expansions", "--quick", "--golden", str(tmp_path / "none.json"))
    assert code == 2
    assert "no baseline" in capsys.readouterr().err


def _prop42(out, extra=()):
    return main(["verify-expansions", "--prop42", "--lambdas", "20,40", "--out", str(out), *extra])


def test_csv_header_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _prop42(a) == _prop42(b)
    text = (a / "prop42.csv").read_bytes()
    assert text == (b / "prop42.csv").read_bytes()
    lines = text.decode().splitlines()
    assert lines[0] == f"# bubblelab verify-expansions --prop42 {__version__} seed=0"
    cols = lines[1].split(",")
    assert "lam" in cols and "alpha" in cols and "prop42_scaled" in cols
    assert len(lines) == 2 + 4  # two lambdas at two alphas


def test_refreeze_requires_ack(tmp_path, monkeypatch, capsys):
    gold = tmp_path / "golden.json"
    shutil.copy(golden.default_path(), gold)
    before = gold.read_text()
    monkeypatch.delenv("ABL_REFREEZE_ACK", raising=False)
    # refused before the 100-probe computation starts
    assert run(tmp_path, "hessian-gap", "--refreeze", "--golden", str(gold)) == 2
    assert "ABL_REFREEZE_ACK" in capsys.readouterr().err
    assert gold.read_text() == before


def test_refreeze_stamps_provenance(tmp_path, monkeypatch):
    gold = tmp_path / "golden.json"
    shutil.copy(golden.default_path(), gold)
    monkeypatch.setenv("ABL_REFREEZE_ACK", "1")
    _prop42(tmp_path / "out", ["--refreeze", "--golden", str(gold)])
    data = json.loads(gold.read_text())
    prov = data["prop42"]["provenance"]
    assert set(prov) == {"commit", "date", "grid"} and "20.0" in prov["grid"]
    assert data["hessian_gap"] == golden.load()["hessian_gap"]  # untouched sections survive


def test_bubble_dump_and_energy_report(tmp_path, capsys):
    field = tmp_path / "z.csv"
    assert run(tmp_path, "bubble-dump", "--lambda", "10", "--a", "0.25,0.5", "--n", "64", "--field", str(field)) == 0
    z = T.read_grid_csv(field).values
    assert z.shape == (64, 64, 3)
    assert np.abs(np.linalg.norm(z, axis=-1) - 1).max() < 1e-12
    assert run(tmp_path, "energy-report", "--in", str(field), "--alpha", "1.02") == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["degree"] == 1 and rep["e_alpha"] > 1 + 4 * np.pi
    assert run(tmp_path, "energy-report", "--in", str(tmp_path / "missing.bin")) == 2


def test_project_command(tmp_path):
    field = tmp_path / "z.bin"
    assert run(tmp_path, "bubble-dump", "--lambda", "12", "--a", "0.5,0.25", "--n", "128", "--field", str(field)) == 0
    assert run(tmp_path, "project", "--in", str(field), "--alpha", "1.04") == 0
    d = json.loads((tmp_path / "proj.json").read_text())
    assert d["params"]["lam"] == pytest.approx(12.0, rel=1e-8)
    assert d["distance"] < 1e-8


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "bubblelab.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == f"bubblelab {__version__}"


@pytest.mark.slow
def test_solve_resume_reproduces_record(tmp_path):
    common = ["--alpha", "1.04", "--n", "256", "--init-lambda", "8"]
    assert run(tmp_path / "full", "solve", *common) == 0
    part = tmp_path / "part"
    assert run(part, "solve", *common, "--max-iters", "10", "--checkpoint-every", "5") == 1
    assert run(part, "solve", *common, "--checkpoint-every", "5", "--resume") == 0
    full = json.loads((tmp_path / "full" / "run.json").read_text())
    resumed = json.loads((part / "run.json").read_text())
    assert resumed["e_alpha"] == pytest.approx(full["e_alpha"], abs=1e-8)
    assert resumed["lam"] == pytest.approx(full["lam"], rel=1e-6)
