import json
import subprocess
import sys

import numpy as np
import pytest

from supnorm_adapt import risk_lab as rl
from supnorm_adapt.cli import SCHEMA, main, read_csv, write_csv
from supnorm_adapt.densities import triangular
from supnorm_adapt.estimator import Sample
from supnorm_adapt.lepski import SelectorVariant, select
from supnorm_adapt.spline_kernel import projection_kernel


@pytest.fixture(scope="module")
def tri_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "tri.txt"
    xs = rl.draw_sample(triangular(), 2 ** 14, 77, 0).xs
    with open(path, "w") as fh:
        fh.write("# synthetic triangular sample\n")
        fh.writelines(f"{float(x)!r}\n" for x in xs)
    return path


def run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--output", str(out)])
    return code, (out.read_bytes() if out.exists() else None)


def test_estimate_matches_library(tri_file, tmp_path):
    code, raw = run(["estimate", "--input", str(tri_file), "--seed", "5"], tmp_path)
    assert code == 0
    doc = json.loads(raw)
    assert doc["schema"] == SCHEMA and doc["version"].startswith("v")
    assert doc["seed"] == 5 and doc["config"]["order"] == 1
    xs = np.loadtxt(tri_file)
    lib = select(Sample(xs), projection_kernel(1), SelectorVariant("bar_eps"), 5)
    assert doc["j_hat"] == lib.trace.j_hat
    assert doc["plug_in_sup"] == lib.trace.plug_in
    assert len(doc["trace"]) == len(lib.trace.tests)


def test_estimate_byte_identical(tri_file, tmp_path):
    _, a = run(["estimate", "--input", str(tri_file), "--seed", "5", "--order", "2"], tmp_path, "a")
    _, b = run(["estimate", "--input", str(tri_file), "--seed", "5", "--order", "2"], tmp_path, "b")
    assert a == b


def test_estimate_too_small(tmp_path, capsys):
    path = tmp_path / "small.txt"
    path.write_text("\n".join(str(0.1 * i) for i in range(10)) + "\n")
    code, _ = run(["estimate", "--input", str(path), "--seed", "1"], tmp_path)
    assert code == 2
    err = capsys.readouterr().err
    assert "j_min" in err and "j_max" in err


def test_estimate_malformed(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("0.1\n0.2\nseven\n")
    assert run(["estimate", "--input", str(bad), "--seed", "1"], tmp_path)[0] == 3
    assert run(["estimate", "--input", str(tmp_path / "missing"), "--seed", "1"], tmp_path)[0] == 3
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing\n\n")
    assert run(["estimate", "--input", str(empty), "--seed", "1"], tmp_path)[0] == 3
    nan = tmp_path / "nan.txt"
    nan.write_text("0.1\nnan\n")
    assert run(["estimate", "--input", str(nan), "--seed", "1"], tmp_path)[0] == 3


def test_estimate_grid_override(tri_file, tmp_path):
    code, raw = run(["estimate", "--input", str(tri_file), "--seed", "1", "--j-min", "2",
                     "--j-max", "6"], tmp_path)
    assert code == 0 and json.loads(raw)["grid"] == {"j_min": 2, "j_max": 6}
    assert run(["estimate", "--input", str(tri_file), "--seed", "1", "--j-min", "6",
                "--j-max", "6"], tmp_path)[0] == 2


def test_estimate_csv_round_trip(tri_file, tmp_path):
    csv_path = tmp_path / "series.csv"
    code = main(["estimate", "--input", str(tri_file), "--seed", "2", "--order", "3",
                 "--output", str(tmp_path / "x.json"), "--csv", str(csv_path)])
    assert code == 0
    text = csv_path.read_text()
    header, rows = read_csv(text)
    assert header == ["x", "density", "cdf"]
    assert write_csv(header, rows) == text


def test_estimate_sentinel(tmp_path):
    path = tmp_path / "atoms.txt"
    path.write_text("\n".join(["0.25"] * 1000 + ["0.75"] * 1000) + "\n")
    code, raw = run(["estimate", "--input", str(path), "--seed", "1", "--cdf-constraint"],
                    tmp_path)
    doc = json.loads(raw)
    assert code == 0 and doc["sentinel"] is True and "density" not in doc["series"]


@pytest.mark.parametrize("ladder", ["", "4096,2048,8192", "4096,4096"])
def test_simulate_bad_ladder(ladder, tmp_path):
    assert run(["simulate", "--seed", "1", "--n-ladder", ladder], tmp_path)[0] == 2


def test_bad_reps(tmp_path):
    assert run(["simulate", "--seed", "1", "--reps", "1"], tmp_path)[0] == 2
    assert run(["verify-bounds", "--seed", "1", "--reps", "1"], tmp_path)[0] == 2
    assert run(["oracle", "--seed", "1", "--reps", "10"], tmp_path)[0] == 2


def test_simulate_slope_matches_library(tmp_path):
    ladder = [2 ** e for e in range(10, 15)]
    code, raw = run(["simulate", "--seed", "3", "--reps", "4", "--n-ladder",
                     ",".join(map(str, ladder)), "--control"], tmp_path)
    assert code == 0
    doc = json.loads(raw)
    lib = rl.rate_regression(triangular(), projection_kernel(1), SelectorVariant("bar_eps"),
                             ladder, 4, 3)
    assert doc["adaptive"]["slope"] == lib.slope
    assert doc["adaptive"]["risk_stderr"] == list(lib.stderrs)
    assert "control" in doc


def test_simulate_power_syntax(tmp_path):
    code, raw = run(["simulate", "--seed", "3", "--reps", "2", "--n-ladder",
                     "2^10,2^11,2^12,2^13,2^14"], tmp_path)
    assert code == 0 and json.loads(raw)["adaptive"]["n"][0] == 1024


def test_simulate_other_experiments(tmp_path):
    code, raw = run(["simulate", "--seed", "3", "--experiment", "clt", "--n", "2048",
                     "--reps", "200", "--n-ladder", "1024,4096", "--ladder-reps", "5"], tmp_path)
    assert code == 0 and 0 <= json.loads(raw)["ks_calibration"] <= 1
    code, raw = run(["simulate", "--seed", "3", "--experiment", "constants", "--reps", "3",
                     "--n-ladder", "2048,4096"], tmp_path)
    assert code == 0 and json.loads(raw)["ratio_gate"] in ("pass", "warn", "fail")


def test_oracle_command(tmp_path):
    csv_path = tmp_path / "o.csv"
    code = main(["oracle", "--seed", "1", "--n", "4096", "--reps", "50",
                 "--output", str(tmp_path / "o.json"), "--csv", str(csv_path)])
    doc = json.loads((tmp_path / "o.json").read_text())
    assert code == 0
    levels = [r["level"] for r in doc["levels"]]
    for key in ("j_star", "j_sharp", "j_H"):
        assert doc[key] in levels
    assert all(0 < r["W"] <= 1 for r in doc["levels"])
    header, rows = read_csv(csv_path.read_text())
    assert write_csv(header, rows) == csv_path.read_text()


def test_verify_bounds_zero_row(tmp_path):
    code, raw = run(["verify-bounds", "--seed", "2", "--reps", "100"], tmp_path)
    doc = json.loads(raw)
    assert code == 0
    row = doc["bounds"][0]
    assert row["t"] == 0.0
    for name, b in row.items():
        if name != "t":
            assert b["value"] == b["prefactor"]
    assert len(doc["violation"]) == 10


@pytest.mark.parametrize("argv", [
    ["oracle", "--n", "4096", "--reps", "50"],
    ["verify-bounds", "--reps", "200"],
    ["simulate", "--reps", "3", "--n-ladder", "1024,2048,4096,8192,16384"],
])
def test_threads_do_not_change_output(argv, tmp_path):
    _, a = run([*argv, "--seed", "4", "--threads", "1"], tmp_path, "a")
    _, b = run([*argv, "--seed", "4", "--threads", "3"], tmp_path, "b")
    assert a == b


def test_seed_required(capsys):
    with pytest.raises(SystemExit):
        main(["oracle"])


def test_module_entry_point(tri_file, tmp_path):
    out = subprocess.run([sys.executable, "-m", "supnorm_adapt", "estimate", "--input",
                          str(tri_file), "--seed", "5"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["schema"] == SCHEMA
