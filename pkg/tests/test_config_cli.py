import json
import subprocess
import sys

import pytest

from pacsafe.cli import main
from pacsafe.config import load_config
from pacsafe.core import Method
from pacsafe.errors import ConfigError
from pacsafe.presets import get_preset, preset_names

FAST = ["--set", "alpha1=0.3", "--set", "alpha2=0.3", "--set", "delta=0.01"]
SERVER = f"{sys.executable} -m pacsafe.systems.plugin_server"


def test_presets():
    names = preset_names()
    assert len(names) == 27 and "table1/ex6-sbc3" in names
    name, p = get_preset("table1/ex6-sbc3")
    assert name == "lotka" and p.kappa == 10 and p.tau == 0.02 and p.U_a == 1.5
    assert get_preset("table1/ex8-sbc3")[1].kappa == 2
    with pytest.raises(ConfigError):
        get_preset("table2/ex1-rbc1")


def test_ini_config(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[system]\nname = lotka\n[method]\nname = sbc3\n"
                   "[params]\nalpha1 = 0.05  # comment\nN_o = 20\n[output]\nseed = 0x10\nworkers = 2\n")
    cfg = load_config(ini)
    assert cfg.system == "lotka" and cfg.params.method is Method.SBC3
    assert cfg.params.kappa == 10 and cfg.params.alpha1 == 0.05 and cfg.params.N_o == 20
    assert cfg.seed == 16 and cfg.workers == 2
    # command-line values win over the file
    cfg = load_config(ini, seed="3", overrides={"alpha1": 0.02})
    assert cfg.seed == 3 and cfg.params.alpha1 == 0.02


@pytest.mark.parametrize("text", ["[bogus]\nx = 1\n", "[params]\nalpha9 = 0.1\n",
                                  "[params]\nalpha1 = abc\n", "[output]\nseed = -1\n",
                                  "[system]\ntimeout = 0\n"])
def test_ini_errors(tmp_path, text):
    ini = tmp_path / "bad.ini"
    ini.write_text(text)
    with pytest.raises(ConfigError):
        load_config(ini)


def test_missing_config_and_conflicts(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "none.ini")
    with pytest.raises(ConfigError):
        load_config(preset="table1/ex1-rbc1", method="sbc3")


def test_plan_command(capsys):
    assert main(["plan", "--preset", "table1/ex9-rbc1"]) == 0
    out = capsys.readouterr().out
    assert "N=114253" in out
    doc = json.loads(out[out.index("{"):])
    assert doc["plan"]["N"] == 114253


def test_plan_hypothesis_violation_exit_2(capsys):
    assert main(["plan", "--preset", "table1/ex1-rbc2", "--set", "alpha1=0.5"]) == 2
    assert "alpha1 < l*delta2" in capsys.readouterr().err


def test_usage_errors_exit_2(capsys):
    assert main(["plan", "--bogus"]) == 2
    assert main(["plan", "--system", "vinc", "--set", "alpha1"]) == 2
    assert main(["plan", "--system", "nope"]) == 2
    assert main(["plan"]) == 2


def test_certify_accept_and_reject(tmp_path, capsys):
    assert main(["certify", "--system", "vinc", "--out", str(tmp_path), *FAST]) == 0
    out = capsys.readouterr().out
    assert "✓" in out
    cert_path = tmp_path / "vinc-RBC1_scenario-seed0.json"
    assert cert_path.is_file()
    assert main(["certify", "--system", "lotka", "--out", str(tmp_path), *FAST]) == 3
    assert "✗" in capsys.readouterr().out
    assert main(["validate", str(cert_path), "--n-states", "200", "--n-mc", "50"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"]


def test_certify_sbc_and_grid(tmp_path, capsys):
    args = ["certify", "--system", "lotka", "--method", "sbc3", "--out", str(tmp_path),
            "--seed", "7", "--set", "alpha1=0.1", "--set", "delta1=0.001", "--set", "tau=0.1",
            "--set", "kappa=2", "--set", "N_o=50"]
    assert main(args) == 0
    assert "lambda*" in capsys.readouterr().out
    cert = tmp_path / "lotka-SBC3-seed7.json"
    assert main(["grid", str(cert), "--resolution", "10", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "lotka-SBC3-seed7-grid10.csv").is_file()
    assert main(["grid", str(cert), "--slice", "1=0.2"]) == 2


def test_plugin_exit_code(tmp_path, capsys):
    rc = main(["certify", "--plugin", f"{SERVER} vinc --fault malformed", "--out", str(tmp_path),
               *FAST])
    assert rc == 4
    assert "malformed" in capsys.readouterr().err


def test_plugin_certify_and_validate(tmp_path, capsys):
    assert main(["certify", "--plugin", f"{SERVER} vinc", "--out", str(tmp_path), *FAST]) == 0
    capsys.readouterr()
    cert = tmp_path / "vinc-RBC1_scenario-seed0.json"
    assert json.loads(cert.read_text())["system"]["source"] == "plugin"
    assert main(["validate", str(cert), "--n-states", "100", "--n-mc", "20"]) == 0


def test_presets_command(capsys):
    assert main(["presets"]) == 0
    assert len(capsys.readouterr().out.split()) == 27


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "pacsafe", "plan", "--preset", "table1/ex6-sbc3"],
                       capture_output=True, text=True, timeout=60)
    assert r.returncode == 0 and "(N, M)=(27164, 631)" in r.stdout
