import json
import subprocess
import sys

import numpy as np
import pytest

from threewave.cli import main
from threewave.config import (ConfigError, RunConfig, config_hash,
                              load_config, parse_config, serialize_config)
from threewave.params import Params


def test_round_trip_is_lossless():
    cfg = RunConfig(params=Params(alpha=0.1, eps0=3.0e-2),
                    grids={"nv": 20}, options={"T": 1e-3}, seed=17,
                    out_dir="somewhere")
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    assert config_hash(again) == config_hash(cfg)


def test_hash_changes_with_content():
    a = RunConfig()
    b = RunConfig(seed=1)
    assert config_hash(a) != config_hash(b)


def test_parse_reports_json_location():
    with pytest.raises(ConfigError, match=r"line 2, column"):
        parse_config('{\n  "seed": }')


def test_parse_rejects_bad_params_with_named_constraint():
    with pytest.raises(ConfigError, match="alpha"):
        parse_config('{"params": {"alpha": 0.5}}')


def test_parse_rejects_unknown_keys_and_bad_types():
    with pytest.raises(ConfigError, match="unknown config keys"):
        parse_config('{"bogus": 1}')
    with pytest.raises(ConfigError, match="seed"):
        parse_config('{"seed": "zero"}')
    with pytest.raises(ConfigError, match="JSON object"):
        parse_config('[1, 2]')


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "nope.json"))


def test_cli_usage_errors_exit_2(tmp_path):
    assert main(["unknown-command"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"params": {"kappa": 1.0}}')
    assert main(["kernels", "--config", str(bad)]) == 2


def test_kernels_command_schema_sidecar_and_determinism(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"options": {"n_kernel_samples": 50}, "seed": 5}))
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["kernels", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["kernels", "--config", str(cfg), "--out", str(out2)]) == 0
    csv1 = (out1 / "kernels.csv").read_bytes()
    assert csv1 == (out2 / "kernels.csv").read_bytes()
    header = csv1.decode().splitlines()[0]
    assert header == "u,v,K3,K3bar,K3_eps"
    meta = json.loads((out1 / "kernels.meta.json").read_text())
    assert meta["seed"] == 5
    assert "numpy" in meta["versions"]
    assert meta["config_hash"] == config_hash(
        parse_config(cfg.read_text()).replace(out_dir=str(out1)))


def test_seed_override_changes_output(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"options": {"n_kernel_samples": 50}}))
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["kernels", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["kernels", "--config", str(cfg), "--out", str(out2),
                 "--seed", "9"]) == 0
    assert (out1 / "kernels.csv").read_bytes() != (out2 / "kernels.csv").read_bytes()


def test_csv_floats_carry_17_significant_digits(tmp_path):
    out = tmp_path / "o"
    assert main(["kernels", "--out", str(out)]) == 0
    row = (out / "kernels.csv").read_text().splitlines()[1].split(",")
    # float64 round-trips exactly through the printed representation
    for cell in row:
        assert float(cell) == float(f"{float(cell):.17g}")


def test_spectrum_command(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"grids": {"spectrum_nodes": [32, 48]}}))
    out = tmp_path / "o"
    assert main(["spectrum", "--config", str(cfg), "--out", str(out)]) == 0
    lines = (out / "spectrum.csv").read_text().splitlines()
    assert lines[0] == "n_nodes,lambda0,lambda1"
    assert len(lines) == 3
    n, lam0, lam1 = lines[1].split(",")
    assert int(n) == 32 and float(lam1) > 0


def test_entry_point_installed():
    proc = subprocess.run([sys.executable, "-m", "threewave.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "threewave" in proc.stdout
