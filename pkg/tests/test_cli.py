import io
import json

import numpy as np
import pytest

from rbflab.cli import main


def write_config(path, cells, nt, nr, power_db=10.0, noise_db=0.0, gains=None):
    c = len(cells)
    if gains is None:
        gains = [1.0 if i == j else 0.0 for i in range(c) for j in range(c)]
    payload = {
        "cells": cells,
        "nt": nt,
        "nr": nr,
        "power_db": power_db,
        "noise_db": noise_db,
        "cross_gain": gains,
    }
    path.write_text(json.dumps(payload))
    return path


@pytest.fixture
def scalar_config(tmp_path):
    # C=1, M=1, N_T=1, N_R=1, eta=1
    return write_config(
        tmp_path / "scalar.json",
        cells=[{"users": 4, "beams": 1}],
        nt=1,
        nr=1,
        power_db=0.0,
    )


@pytest.fixture
def miso_config(tmp_path):
    return write_config(
        tmp_path / "miso.json",
        cells=[{"users": 6, "beams": 2}],
        nt=2,
        nr=1,
        power_db=10.0,
    )


def read_table(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    return np.genfromtxt(io.StringIO("\n".join(lines)), delimiter=",", names=True)


def test_sinr_cdf_reruns_byte_identical(miso_config, tmp_path, capsys):
    out = tmp_path / "cdf.csv"
    argv = [
        "sinr-cdf",
        "--config",
        str(miso_config),
        "--rx",
        "mmse",
        "--samples",
        "2000",
        "--grid-points",
        "60",
        "--seed",
        "7",
        "--out",
        str(out),
    ]
    assert main(argv) == 0
    first = out.read_bytes()
    assert main(argv) == 0
    assert out.read_bytes() == first
    text = first.decode()
    assert text.startswith("# command: sinr-cdf\n")
    assert "s,F_empirical,F_analytic" in text
    assert "[PASS] KS distance" in capsys.readouterr().out
    manifest = json.loads((tmp_path / "cdf.csv.manifest.json").read_text())
    assert manifest["command"] == "sinr-cdf"
    assert manifest["ks"]["passed"] is True
    assert manifest["warnings"] == []
    assert manifest["inputs"]["samples"] == 2000


def test_sinr_cdf_analytic_column_matches_known_law(scalar_config, tmp_path):
    # M=1, N_R=1, eta=1 under antenna selection: F(s) = 1 - e^{-s}
    out = tmp_path / "cdf.csv"
    code = main(
        [
            "sinr-cdf",
            "--config",
            str(scalar_config),
            "--rx",
            "as",
            "--samples",
            "5000",
            "--grid-points",
            "40",
            "--seed",
            "3",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    table = read_table(out)
    np.testing.assert_allclose(
        table["F_analytic"], -np.expm1(-table["s"]), atol=1e-12
    )
    gap = np.abs(table["F_analytic"] - table["F_empirical"])
    assert gap.max() < 1.358 / np.sqrt(5000)


def test_sinr_cdf_falls_back_to_empirical_when_no_law(scalar_config, tmp_path, capsys):
    # a single-beam cell with N_R = 1 satisfies the nulling condition, so
    # the MMSE closed form refuses and the tool emits samples only
    out = tmp_path / "cdf.csv"
    code = main(
        [
            "sinr-cdf",
            "--config",
            str(scalar_config),
            "--rx",
            "mmse",
            "--samples",
            "1000",
            "--seed",
            "5",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    captured = capsys.readouterr()
    assert "empirical only" in captured.out
    assert "warning:" in captured.err
    header = out.read_text().splitlines()
    assert "s,F_empirical" in header
    assert all("F_analytic" not in line for line in header)
    manifest = json.loads((tmp_path / "cdf.csv.manifest.json").read_text())
    assert manifest["ks"] is None
    assert manifest["warnings"]


def test_sinr_cdf_usage_errors(miso_config, tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    base = ["sinr-cdf", "--config", str(miso_config), "--out", out]
    assert main(base + ["--samples", "10"]) == 2
    assert "error:" in capsys.readouterr().err
    assert main(base + ["--cell", "3"]) == 2
    assert main(base + ["--grid-min", "5.0", "--grid-max", "1.0"]) == 2
    missing = ["sinr-cdf", "--config", str(tmp_path / "nope.json"), "--out", out]
    assert main(missing) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["sinr-cdf", "--config", str(bad), "--out", out]) == 2
    with pytest.raises(SystemExit) as exc:
        main(base + ["--rx", "zf"])
    assert exc.value.code == 2


def test_sumrate_rows_and_user_scaling(miso_config, tmp_path, capsys):
    out = tmp_path / "rate.csv"
    code = main(
        [
            "sumrate",
            "--config",
            str(miso_config),
            "--rx",
            "mf",
            "--rho-db",
            "5,10",
            "--alpha",
            "1.0",
            "--trials",
            "50",
            "--seed",
            "11",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    assert "2 rows" in capsys.readouterr().out
    table = read_table(out)
    np.testing.assert_array_equal(table["rho_db"], [5.0, 10.0])
    # K = floor(rho^alpha): 10^0.5 -> 3, 10^1 -> 10
    np.testing.assert_array_equal(table["K"], [3, 10])
    assert np.all(table["rate"] > 0)
    assert np.all(table["stderr"] > 0)


def test_sumrate_rejects_infeasible_rho(miso_config, tmp_path, capsys):
    # rho = 1 gives K = 1 < M = 2 beams
    code = main(
        [
            "sumrate",
            "--config",
            str(miso_config),
            "--rho-db",
            "0",
            "--trials",
            "10",
            "--out",
            str(tmp_path / "rate.csv"),
        ]
    )
    assert code == 2
    assert "rho 0 dB" in capsys.readouterr().err


def test_sweep_m_rows_and_rerun(miso_config, tmp_path):
    out = tmp_path / "sweep.csv"
    argv = [
        "sweep-m",
        "--config",
        str(miso_config),
        "--rho-db",
        "10",
        "--m-range",
        "1:2",
        "--trials",
        "60",
        "--seed",
        "23",
        "--out",
        str(out),
    ]
    assert main(argv) == 0
    first = out.read_bytes()
    table = read_table(out)
    np.testing.assert_array_equal(table["M"], [1, 2])
    np.testing.assert_array_equal(table["rho_db"], [10.0, 10.0])
    assert main(argv) == 0
    assert out.read_bytes() == first
    bad = list(argv)
    bad[bad.index("1:2")] = "1:x"
    assert main(bad) == 2


def test_dof_writes_staircase_region_hull_and_support(tmp_path):
    out = tmp_path / "dof"
    code = main(
        [
            "dof",
            "--alpha",
            "6,6",
            "--nt",
            "4",
            "--nr",
            "2",
            "--rx",
            "mmse",
            "--alpha-grid",
            "0:2:0.5",
            "--weights",
            "1,0",
            "--weights",
            "0.3,0.7",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    stairs = read_table(out / "single_cell.csv")
    np.testing.assert_allclose(stairs["alpha"], [0.0, 0.5, 1.0, 1.5, 2.0])
    assert np.all(stairs["m_star"] >= 1)
    assert np.all(stairs["d_star"] <= 4.0 + 1e-12)

    region = read_table(out / "region_points.csv")
    assert set(region.dtype.names) == {"m1", "m2", "d1", "d2"}
    assert region.shape[0] == 25

    hull = read_table(out / "hull.csv")
    corners = {(float(a), float(b)) for a, b in zip(hull["d1"], hull["d2"])}
    assert corners == {(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)}

    support = read_table(out / "support.csv")
    np.testing.assert_allclose(support["value"], [4.0, 4.0], atol=1e-12)

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "dof"


def test_dof_single_cell_has_no_hull_file(tmp_path):
    out = tmp_path / "dof1"
    code = main(
        [
            "dof",
            "--alpha",
            "1.0",
            "--nt",
            "3",
            "--nr",
            "2",
            "--alpha-grid",
            "0:1:0.5",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    assert (out / "single_cell.csv").exists()
    assert not (out / "hull.csv").exists()


def test_validate_named_suite(capsys):
    assert main(["validate", "--suite", "region", "--seed", "1234"]) == 0
    out = capsys.readouterr().out
    assert "overall: PASS" in out
    assert "[PASS]" in out
    with pytest.raises(SystemExit) as exc:
        main(["validate", "--suite", "bogus"])
    assert exc.value.code == 2


def test_top_level_parser_behaviour(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "rbflab" in capsys.readouterr().out
