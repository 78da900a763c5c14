import csv
import json
import math

import pytest

from modsmooth import cli

MINIMAL = """
command = "modulus"
f = "x^2"
k = 2
r = 0
p = "inf"
t = [0.1]
"""


def read_rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def test_minimal_config():
    cfg = cli.parse_config(MINIMAL)
    assert cfg.command == "modulus" and cfg.function_names == ["x^2"]
    assert cfg.k == 2 and cfg.r == 0 and math.isinf(cfg.p) and cfg.t_values == [0.1]


def test_unknown_function_names_key():
    with pytest.raises(cli.ConfigError, match="^f: unknown function name"):
        cli.parse_config(MINIMAL.replace('"x^2"', '"nonexistent"'))


def test_p_below_one():
    with pytest.raises(cli.ConfigError, match=r"p must be in \[1, inf\]"):
        cli.parse_config(MINIMAL.replace('"inf"', "0.5"))


@pytest.mark.parametrize("text, msg", [
    (MINIMAL + "bogus = 1\n", "unknown keys"),
    (MINIMAL + "[quadrature]\nwidth = 3\n", "unknown keys in"),
    (MINIMAL.replace("k = 2", 'k = "two"'), "k must be an integer"),
    (MINIMAL.replace("t = [0.1]", "t = [-0.1]"), "t values"),
    (MINIMAL.replace("t = [0.1]", "t = [0.1"), "malformed"),
    (MINIMAL.replace('"modulus"', '"plot"'), "command must be"),
])
def test_config_errors(text, msg):
    with pytest.raises(cli.ConfigError, match=msg):
        cli.parse_config(text)


def test_parse_p():
    assert cli.parse_p("inf") == math.inf
    assert cli.parse_p(2) == 2.0
    with pytest.raises(cli.ConfigError):
        cli.parse_p("abc")


def test_modulus_polynomial_zero(tmp_path):
    code = cli.main(["--out", str(tmp_path), "modulus", "--f", "x^2", "--k", "3", "--t", "0.2", "--t", "0.4"])
    assert code == 0
    text = (tmp_path / "modulus.csv").read_text()
    assert text.startswith("#schema=1\n")
    rows = read_rows(tmp_path / "modulus.csv")
    assert [float(r["value"]) for r in rows] == [0.0, 0.0]


def test_kfunc_and_bestapprox(tmp_path):
    assert cli.main(["--out", str(tmp_path), "kfunc", "--f", "x^2", "--k", "2", "--t", "0.1"]) == 0
    row = read_rows(tmp_path / "kfunc.csv")[0]
    assert float(row["value"]) <= 0.02
    assert cli.main(["--out", str(tmp_path), "bestapprox", "--f", "abs_x_1", "--n", "2", "--certificate"]) == 0
    row = read_rows(tmp_path / "bestapprox.csv")[0]
    assert float(row["error"]) == pytest.approx(0.5, abs=1e-8)
    assert len(read_rows(tmp_path / "certificate.csv")) >= 3


def test_error_exit_codes(tmp_path):
    assert cli.main(["--out", str(tmp_path), "modulus", "--f", "nope", "--t", "0.1"]) == 2
    assert cli.main(["--out", str(tmp_path), "bestapprox", "--f", "exp", "--p", "0.5"]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["--out", str(blocker / "sub"), "modulus", "--f", "exp", "--t", "0.1"]) == 2


def test_run_config_file(tmp_path):
    conf = tmp_path / "run.toml"
    conf.write_text(MINIMAL + f'output_dir = "{tmp_path / "o"}"\n')
    assert cli.main(["run", str(conf)]) == 0
    rows = read_rows(tmp_path / "o" / "modulus.csv")
    assert float(rows[0]["value"]) == pytest.approx(0.02, rel=1e-9)


def test_verify_summary_and_cache_bytes(tmp_path):
    args = ["--out", str(tmp_path), "--cache", "verify", "--suite", "characterization"]
    assert cli.main(args) in (0, 1)
    summary = json.loads((tmp_path / "verify" / "summary.json").read_text())
    assert all({"theorem_id", "fitted_constant", "cap", "verdict"} <= set(s) for s in summary)
    first = {p.name: p.read_bytes() for p in (tmp_path / "verify").iterdir()}
    assert any((tmp_path / ".cache").iterdir())
    assert cli.main(args) in (0, 1)
    second = {p.name: p.read_bytes() for p in (tmp_path / "verify").iterdir()}
    assert first == second


def test_report_after_verify(tmp_path):
    cli.main(["--out", str(tmp_path), "verify", "--suite", "membership", "--f", "exp"])
    assert cli.main(["--out", str(tmp_path), "report"]) == 0
    assert "membership" in (tmp_path / "report.md").read_text()


def test_csv_round_trips_floats():
    x = 0.1 + 0.2
    text = cli.csv_text(["a"], [[x]])
    assert float(text.splitlines()[-1]) == x


def test_cache_bit_exact(tmp_path):
    cache = cli.Cache(tmp_path, True)
    key = {"q": [1, 2.5], "f": "exp"}
    value = {"v": 1 / 3, "w": [math.pi, 1e-300]}
    assert cache.get(key) is None
    cache.put(key, value)
    assert cli.Cache(tmp_path, True).get(key) == value
