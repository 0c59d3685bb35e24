import subprocess
import sys

import numpy as np
import pytest

from frachj import cli
from frachj.io import emit_csv, emit_summary, format_float, read_csv


# -- writers ------------------------------------------------------------------


def test_empty_table_writes_header_only(tmp_path):
    p = tmp_path / "e.csv"
    emit_csv({"t": [], "u": []}, p)
    assert p.read_text() == "t,u\n"


def test_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    cols = {"t": rng.standard_normal(50), "u": rng.standard_normal(50) * 1e-300}
    p = tmp_path / "r.csv"
    emit_csv(cols, p)
    back = read_csv(p)
    for k in cols:
        np.testing.assert_array_equal(back[k], cols[k])


def test_csv_bytes_are_stable(tmp_path):
    cols = {"x": np.linspace(0, 1, 7), "y": np.exp(np.linspace(0, 1, 7))}
    emit_csv(cols, tmp_path / "a.csv")
    emit_csv(cols, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_csv_rejects_ragged(tmp_path):
    with pytest.raises(ValueError):
        emit_csv({"a": [1, 2], "b": [1]}, tmp_path / "x.csv")


def test_format_float_special_values():
    assert format_float(float("nan")) == "nan"
    assert format_float(-float("inf")) == "-inf"
    assert float(format_float(0.1)) == 0.1


def test_summary_format(tmp_path):
    p = tmp_path / "s.txt"
    emit_summary({"ok": True, "n": 3, "x": 0.5, "msg": 'a "b"'}, p)
    assert p.read_text() == "ok = true\nn = 3\nx = 0.5\nmsg = \"a 'b'\"\n"


# -- argument handling -------------------------------------------------------------


def test_every_subcommand_has_parser():
    parser = cli.build_parser()
    for sub in cli.PARAMS:
        args = parser.parse_args([sub])
        assert args.subcommand == sub


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('subcommand = "rate"\nD = 1.5\nalpha = 0.3\n')
    got = cli.resolve("rate", cli.load_config(cfg), {"D": "1.25", "alpha": None})
    assert got["D"] == 1.25 and got["alpha"] == 0.3


def test_config_for_other_subcommand_rejected(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('subcommand = "fode"\n')
    with pytest.raises(cli.ConfigError, match="subcommand"):
        cli.resolve("rate", cli.load_config(cfg), {})


@pytest.mark.parametrize("argv, word", [
    (["rate", "--alpha", "1.5"], "alpha"),
    (["rate", "--D", "0.5"], "'D'"),
    (["fode", "--M", "2.5"], "'M'"),
    (["hj", "--f", "nonsense"], "nonsense"),
])
def test_invalid_input_exit_2(argv, word, capsys):
    assert cli.main(argv) == 2
    assert word in capsys.readouterr().err


def test_unknown_config_key_exit_2(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("alpha = 0.5\nbogus = 1\n")
    assert cli.main(["rate", "--config", str(cfg)]) == 2
    assert "bogus" in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path):
    assert cli.main(["rate", "--config", str(tmp_path / "none.toml")]) == 2


def test_fode_quadratic_short_horizon_exit_3(tmp_path, capsys):
    code = cli.main(["fode", "--k", "2", "--T", "50", "--M", "200", "--out", str(tmp_path)])
    assert code == 3


def test_out_directory_and_file(tmp_path):
    assert cli.main(["rate", "--D", "1.25", "--out", str(tmp_path / "d")]) == 0
    assert (tmp_path / "d" / "rate.csv").exists()
    assert (tmp_path / "d" / "rate.summary.txt").exists()
    assert cli.main(["rate", "--out", str(tmp_path / "gap.csv")]) == 0
    assert (tmp_path / "gap.csv").exists() and (tmp_path / "gap.summary.txt").exists()


@pytest.mark.parametrize("argv", [
    ["caputo", "--M", "64"],
    ["mlf", "--points", "8"],
    ["beta"],
    ["counterexample", "--K_max", "6", "--n_plateau", "8"],
    ["fode", "--T", "5", "--M", "64"],
    ["hj", "--n", "16", "--T", "2", "--M", "20"],
    ["rate", "--D", "1.25"],
])
def test_subcommands_run(argv, tmp_path):
    assert cli.main(argv + ["--out", str(tmp_path)]) == 0
    table = read_csv(tmp_path / f"{argv[0]}.csv")
    first = next(iter(table.values()))
    assert first.size > 0 and np.all(np.isfinite(first))


def test_hj_snapshots_written(tmp_path):
    argv = ["hj", "--n", "16", "--T", "4", "--M", "20", "--snapshots", "1,2", "--out", str(tmp_path)]
    assert cli.main(argv) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert sum(1 for s in names if s.startswith("hj_t")) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "frachj", "rate", "--D", "1.25"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "exponent" in proc.stdout
    bad = subprocess.run([sys.executable, "-m", "frachj", "mlf", "--alpha", "0"],
                         capture_output=True, text=True)
    assert bad.returncode == 2 and "alpha" in bad.stderr
