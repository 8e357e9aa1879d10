import hashlib
import json
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from hglk.cli import main

ROOT = Path(__file__).resolve().parents[1]
DEFAULT = ROOT / "configs" / "default.yaml"


def _write_cfg(tmp_path, **sim):
    data = yaml.safe_load(DEFAULT.read_text())
    data["sim"].update(sim)
    path = tmp_path / "cfg.yaml"
    path.write_text(yaml.safe_dump(data))
    return path


def _manifest_ok(out: Path) -> dict:
    man = json.loads((out / "manifest.json").read_text())
    for entry in man["files"]:
        assert hashlib.sha256((out / entry["path"]).read_bytes()).hexdigest() == entry["sha256"]
    listed = {e["path"] for e in man["files"]}
    assert listed == {p.name for p in out.iterdir()} - {"manifest.json"}
    assert len(man["config_sha256"]) == 64 and "seed" in man
    return man


@pytest.fixture(scope="module")
def verify_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("verify")
    code = main(["verify", str(DEFAULT), "--out", str(out)])
    return code, out


def test_verify_default_passes(verify_run):
    code, out = verify_run
    assert code == 0
    man = _manifest_ok(out)
    names = [s["name"] for s in man["suites"]]
    assert len(names) == 12
    assert all(s["passed"] and s["pass_count"] == s["total"] for s in man["suites"])


def test_simulate_large_data_blows_up(tmp_path):
    cfg = _write_cfg(tmp_path, amplitude=60.0)
    out = tmp_path / "sim"
    assert main(["simulate", str(cfg), "--out", str(out)]) == 0
    last = (out / "trace.csv").read_text().strip().splitlines()[-1]
    assert last.startswith("# status=blown_up")
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["predicted"] and cert["T_obs"] <= cert["t_bound"]
    _manifest_ok(out)


def test_bad_power_is_config_error(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, p=0.5)
    assert main(["simulate", str(cfg), "--out", str(tmp_path / "x")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert any("p > 1 required" in msg for msg in err["problems"])
    assert not (tmp_path / "x").exists()


def test_errors_are_aggregated(tmp_path, capsys):
    data = yaml.safe_load(DEFAULT.read_text())
    data["sim"]["p"] = 0.5
    data["grid"]["n"] = -3
    data["frac"]["quad_nodes"] = "many"
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(data))
    assert main(["spectrum", str(path)]) == 2
    assert len(json.loads(capsys.readouterr().err)["problems"]) >= 3


def test_unknown_subcommand(capsys):
    assert main(["explode"]) == 2
    assert "unknown subcommand" in capsys.readouterr().err


def test_unparsable_config(tmp_path, capsys):
    path = tmp_path / "broken.yaml"
    path.write_text("grid: [unclosed\n")
    assert main(["spectrum", str(path)]) == 2


@pytest.mark.parametrize("command", ["spectrum", "fracpow", "besov", "commutator"])
def test_cheap_subcommands_emit_manifest(tmp_path, command):
    out = tmp_path / command
    assert main([command, str(DEFAULT), "--out", str(out)]) == 0
    man = _manifest_ok(out)
    assert man["command"] == command and man["files"]


def test_simulate_is_deterministic(tmp_path):
    cfg = _write_cfg(tmp_path, amplitude=60.0)
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert main(["simulate", str(cfg), "--out", str(out)]) == 0
    for name in ("trace.csv", "certificate.json", "simulation.json", "manifest.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hglk.cli", "nope"], capture_output=True, text=True)
    assert proc.returncode == 2
    assert json.loads(proc.stderr)["exit_code"] == 2
