import json
import subprocess
import sys

import pytest

from fdxsim import load_mask_csv
from fdxsim.cli import main


def write_config(path, **overrides):
    cfg = {
        "kind": "single_point",
        "engine": "closed_form",
        "oscillator": {"lf": -50.0, "lw": -120.0},
        "ofdm": {"n_symbols": 20},
        "trials": 2,
    }
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))
    return path


def test_validate_ok(tmp_path, capsys):
    cfg = write_config(tmp_path / "cfg.json")
    assert main(["validate", str(cfg)]) == 0
    assert "OK" in capsys.readouterr().out


def test_validate_rejects_bad_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{nope")
    assert main(["validate", str(path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_validate_rejects_unknown_keys(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"kind": "single_point", "bogus": 1}))
    assert main(["validate", str(path)]) == 2


def test_missing_config_file_is_a_config_error(tmp_path):
    assert main(["validate", str(tmp_path / "nope.json")]) == 2


def test_run_writes_csv(tmp_path, capsys):
    cfg = write_config(tmp_path / "cfg.json", output=str(tmp_path / "out.csv"))
    assert main(["run", str(cfg)]) == 0
    out = (tmp_path / "out.csv").read_text().splitlines()
    assert out[0].startswith("lf_dbc_hz,lw_dbc_hz,sic_cf_db")
    assert len(out) == 2


def test_run_without_output_path_fails(tmp_path):
    cfg = write_config(tmp_path / "cfg.json")
    assert main(["run", str(cfg)]) == 2


def test_run_infeasible_fixed_alc_exits_3(tmp_path):
    cfg = write_config(
        tmp_path / "cfg.json",
        cancellation={"alc_db": 35.0, "dlc_db": 70.0},
        output=str(tmp_path / "out.csv"),
    )
    assert main(["run", str(cfg)]) == 3


def test_run_io_error_exits_4(tmp_path):
    cfg = write_config(tmp_path / "cfg.json", output=str(tmp_path / "missing" / "out.csv"))
    assert main(["run", str(cfg)]) == 4


def test_mask_subcommand_emits_loadable_csv(tmp_path, capsys):
    out = tmp_path / "mask.csv"
    assert main(["mask", "--lf", "-60", "--lw", "-120", "-o", str(out)]) == 0
    mask = load_mask_csv(out)
    assert mask.offsets_hz[0] == pytest.approx(100.0)
    assert mask.level_dbc_hz(1e6) < -100.0


def test_mask_infeasible_pair_exits_3(tmp_path, capsys):
    out = tmp_path / "mask.csv"
    assert main(["mask", "--lf", "-60", "--lw", "-100", "-o", str(out)]) == 3
    assert "infeasible" in capsys.readouterr().err


def test_mask_loop_bw_override(tmp_path):
    out = tmp_path / "mask.csv"
    assert main(["mask", "--lf", "-60", "--lw", "-120", "--loop-bw", "1e5", "-o", str(out)]) == 0
    mask = load_mask_csv(out)
    # narrow loop: 1 MHz sits far outside, showing the bare thermal level
    assert mask.level_dbc_hz(1e6) == pytest.approx(-120.0, abs=0.5)


def test_point_closed_form(capsys):
    code = main(["point", "--lf", "-50", "--lw", "-120", "--engine", "closed_form"])
    assert code == 0
    out = capsys.readouterr().out
    assert "sic_cf_db=" in out
    value = float(out.split("sic_cf_db=")[1].split()[0])
    assert 80.0 < value < 100.0


def test_point_monte_carlo_uses_env_seed(monkeypatch, capsys):
    args = [
        "point", "--lf", "-50", "--lw", "-120",
        "--engine", "monte_carlo", "--trials", "2", "--symbols", "20",
    ]
    assert main(args) == 0
    first = capsys.readouterr().out
    monkeypatch.setenv("FDXSIM_SEED", "777")
    assert main(args) == 0
    second = capsys.readouterr().out
    assert first != second


def test_point_infeasible_alc_exits_3(capsys):
    code = main(["point", "--lf", "-50", "--lw", "-120", "--alc", "36"])
    assert code == 3


def test_console_script_help_runs():
    result = subprocess.run(
        [sys.executable, "-m", "fdxsim.cli", "--help"], capture_output=True, text=True
    )
    assert result.returncode == 0
    assert "fdxsim" in result.stdout
