import csv
import io
import subprocess
import sys

import pytest

from artinlf.cli import main, parse_complex, parse_config_text


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_charsum(capsys):
    code, out, _ = run(["charsum", "--n", "4", "--p", "3", "--a", "2"], capsys)
    assert code == 0 and out.strip() == "-2"


def test_ramification(capsys):
    code, out, _ = run(["ramification", "--p", "3", "--m", "1", "--n", "3", "--i", "8"], capsys)
    assert code == 0 and out.strip() == "eta = 4 >= bound 2"


def test_no_arguments_prints_usage(capsys):
    code, _, err = run([], capsys)
    assert code == 2 and "usage" in err and "experiment" in err


def test_console_script_exit_code():
    proc = subprocess.run([sys.executable, "-m", "artinlf.cli"], capture_output=True, text=True)
    assert proc.returncode == 2 and "usage" in proc.stderr


@pytest.mark.parametrize("argv, code", [
    (["charsum", "--n", "4", "--p", "3"], 3),
    (["charsum", "--n", "4", "--p", "4", "--a", "2"], 3),
    (["charsum", "--n", "x", "--p", "3", "--a", "2"], 3),
    (["charsum", "--bogus", "1"], 2),
    (["nosuch"], 2),
    (["experiment", "--curve", "0,-1,1,0,0", "--conductor", "11", "--p", "3", "--gamma", "0.9"], 3),
    (["experiment", "--curve", "0,-1,1,0,0", "--conductor", "11", "--p", "11"], 3),
])
def test_error_codes(argv, code, capsys):
    got, _, err = run(argv, capsys)
    assert got == code
    assert err.startswith("artinlf:") or "usage" in err


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 4\np = 3\na = 2\ncolour = blue\n")
    code, _, err = run(["charsum", "--config", str(cfg)], capsys)
    assert code == 2 and "colour" in err


def test_config_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nn = 1\np = 3\na = 2\n")
    code, out, _ = run(["charsum", "--config", str(cfg), "--n", "4"], capsys)
    assert code == 0 and out.strip() == "-2"


def test_parse_helpers():
    assert parse_config_text("a-min = 3\n\n beta = 1.4 # note\n") == {"a_min": "3", "beta": "1.4"}
    assert parse_complex("1.25,0.5") == 1.25 + 0.5j
    assert parse_complex("1+0.5i") == 1 + 0.5j
    assert parse_complex("2") == 2


def test_conductor(capsys):
    code, out, _ = run(["conductor", "--curve", "0,-1,1,0,0", "--conductor", "11", "--rep", "5:1:1+5:1:3",
                        "--p", "3", "--a", "2"], capsys)
    assert code == 0 and f"N = {11 ** 2 * 25 ** 2 * 3 ** 8}" in out


def test_coefficients_csv(tmp_path, capsys):
    out_path = tmp_path / "c.csv"
    code, _, _ = run(["coefficients", "--curve", "0,-1,1,0,0", "--conductor", "11", "--cutoff", "12",
                      "--out", str(out_path)], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out_path.read_text())))
    assert [int(float(r["c_re"])) for r in rows] == [1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2]
    assert not list(tmp_path.glob("*.tmp"))


def test_lvalue_row_has_error_estimate(capsys):
    code, out, _ = run(["lvalue", "--curve", "0,-1,1,0,0", "--conductor", "11", "--beta", "1.25"], capsys)
    assert code == 0
    (row,) = list(csv.DictReader(io.StringIO(out)))
    assert float(row["w_re"]) == pytest.approx(1.0, abs=1e-6)
    assert 0 < float(row["error_estimate"]) < 1e-8
    assert int(row["conductor"]) == 11


def test_experiment_byte_identical_across_threads(tmp_path, capsys):
    base = ["experiment", "--curve", "0,-1,1,0,0", "--conductor", "11", "--p", "3", "--a-min", "2",
            "--a-max", "3", "--no-timing"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(base + ["--out", str(a)]) == 0
    assert main(base + ["--threads", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0].split(",")
    assert header[:3] == ["a", "primitive_count", "A1_re"] and "max_error_estimate" in header


def test_selftest_filter(capsys):
    code, out, _ = run(["selftest", "--filter", "characters"], capsys)
    assert code == 0
    lines = [ln for ln in out.splitlines() if ln.strip() and "failure" not in ln]
    assert lines and all(ln.startswith("characters") for ln in lines)


def test_selftest_unknown_filter(capsys):
    code, _, _ = run(["selftest", "--filter", "nosuch"], capsys)
    assert code == 3
