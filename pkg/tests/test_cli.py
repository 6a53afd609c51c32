import json

import numpy as np
import pytest

from mocont import cli
from mocont.io import RunManifest, read_points_csv
from mocont.problems import Quadratic


def _run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_run_writes_outputs(tmp_path, capsys):
    prefix = tmp_path / "toy"
    code, out, _ = _run(["run", "--problem", "toy4_1", "--tau", "0.05", "--out", str(prefix)], capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["points"] > 10
    table = read_points_csv(f"{prefix}.csv")
    assert table.x.shape[1] == 3
    assert np.all(table.kkt_residual <= 1e-6)
    raw = (tmp_path / "toy.csv").read_bytes()
    assert b"\r\n" not in raw
    man = RunManifest.load(f"{prefix}.manifest.json")
    assert man.problem == "toy4_1" and man.n_points == summary["points"]


def test_floats_survive_text_roundtrip(tmp_path, capsys):
    prefix = tmp_path / "ex2"
    assert cli.main(["run", "--problem", "example2", "--out", str(prefix)]) == 0
    capsys.readouterr()
    table = read_points_csv(f"{prefix}.csv")
    model = cli.build_problem("example2")
    # f is stored with 17 digits, so recomputing from the stored x is exact
    for x, f in zip(table.x, table.f):
        assert model.value(x) == f


def test_rerun_from_manifest_is_bit_identical(tmp_path, capsys):
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert cli.main(["run", "--problem", "split", "--tau", "0.05", "--out", str(a)]) == 0
    assert cli.main(["run", "--from-manifest", f"{a}.manifest.json", "--out", str(b)]) == 0
    capsys.readouterr()
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_oracle_and_compare(tmp_path, capsys):
    run_prefix = tmp_path / "lasso"
    orc_prefix = tmp_path / "lasso_h"
    assert cli.main(["run", "--problem", "lasso", "--dim", "4", "--tau", "0.05", "--out", str(run_prefix)]) == 0
    assert cli.main(["oracle", "lasso", "--problem", "lasso", "--dim", "4", "--out", str(orc_prefix)]) == 0
    capsys.readouterr()
    code, out, _ = _run(["compare", f"{run_prefix}.front.csv", f"{orc_prefix}.front.csv"], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["hausdorff_polyline"] <= 0.1


def test_grid_oracle(tmp_path, capsys):
    prefix = tmp_path / "grid"
    code, out, _ = _run(["oracle", "grid", "--problem", "example1", "--box", "-2", "1", "-1", "2.5",
                         "--resolution", "0.05", "--out", str(prefix)], capsys)
    assert code == 0
    assert json.loads(out)["critical"] > 0
    assert (tmp_path / "grid.critical.csv").read_text().startswith("x_1,x_2\n")


@pytest.mark.parametrize("argv", [
    ["run", "--problem", "nonsense"],
    ["run"],
    ["run", "--problem", "toy4_1", "--tau", "-1"],
    ["run", "--problem", "toy4_1", "--param", "noise=1"],
    ["oracle", "lasso", "--problem", "toy4_1"],
    ["oracle", "grid", "--problem", "example1"],
    ["frobnicate"],
])
def test_configuration_errors_exit_2(argv, tmp_path, capsys):
    code, _, _ = _run(argv + (["--out", str(tmp_path / "x")] if argv[0] != "frobnicate" else []), capsys)
    assert code == 2


def test_malformed_csv_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("branch_id,step,x_1\n0,0\n")
    good = tmp_path / "good.csv"
    good.write_text("f,l1\n1,0\n0,1\n")
    code, _, err = _run(["compare", str(bad), str(good)], capsys)
    assert code == 2 and "error" in err
    code, _, _ = _run(["compare", str(tmp_path / "missing.csv"), str(good)], capsys)
    assert code == 2


def test_empty_run_exit_3(tmp_path, capsys, monkeypatch):
    # minimizer at the origin: nothing to continue from
    monkeypatch.setattr(cli, "build_problem", lambda name, params=None: Quadratic([0.0, 0.0]))
    code, _, err = _run(["run", "--problem", "toy4_1", "--out", str(tmp_path / "z")], capsys)
    assert code == 3 and "no critical point" in err


def test_recipes(capsys):
    assert cli.main(["recipes"]) == 0
    assert "mocont run" in capsys.readouterr().out
