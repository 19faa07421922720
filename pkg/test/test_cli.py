import json
import math
from pathlib import Path

import numpy as np
import pytest

from app.common.errors import EXIT_ERROR, EXIT_FAIL, EXIT_OK
from main import run


def lines(text: str) -> list[str]:
    return [line for line in text.splitlines() if line.strip()]


@pytest.fixture
def tables(write_table):
    xs = np.linspace(-5.0, 5.0, 101)
    return {
        "unit": write_table("unit.csv", ("x", "kappa"), [(-5.0, 1.0), (5.0, 1.0)]),
        "over": write_table("over.csv", ("x", "kappa"), [(-5.0, 1.5), (5.0, 1.5)]),
        "sphere": write_table("sphere.csv", ("x", "kappa"), [(0.0, 1.0), (math.pi, 1.0)]),
        "long": write_table("long.csv", ("x", "kappa"), [(0.0, 1.0), (4.0, 1.0)]),
        "flat": write_table("flat.csv", ("x", "kappa"), [(0.0, 0.0), (10.0, 0.0)]),
        "f": write_table("f.csv", ("x", "f"), [(x, 0.5 * x * x) for x in xs]),
        "S": write_table("S.csv", ("x", "S"), [(x, 0.5 * x * x) for x in xs]),
        "space": write_table("space.csv", ("x", "weight"), [(0.0, 1.0), (10.0, 1.0)]),
        "mu0": write_table("mu0.csv", ("x", "density"), [(1.0, 1.0), (2.0, 1.0)]),
        "mu1": write_table("mu1.csv", ("x", "density"), [(5.0, 1.0), (6.0, 1.0)]),
    }


# ----------------------------------------------------------------------
# sin / sigma
# ----------------------------------------------------------------------


def test_sin_csv_and_json(tables, capsys) -> None:
    assert run(["sin", "--kappa", str(tables["sphere"])]) == EXIT_OK
    out = lines(capsys.readouterr().out)
    assert out[0] == "x,s,c"
    assert len(out) > 10

    assert run(["sin", "--kappa", str(tables["sphere"]), "--json"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["L"] == pytest.approx(math.pi)
    assert payload["s_L"] == pytest.approx(0.0, abs=1e-6)
    assert payload["c_L"] == pytest.approx(-1.0, abs=1e-6)


def test_sigma_value_and_infinite(tables, capsys) -> None:
    assert run(["sigma", "--kappa", str(tables["long"]), "--theta", "1.0", "--t", "0.5"]) == EXIT_OK
    value = float(capsys.readouterr().out.strip())
    assert value == pytest.approx(math.sin(0.5) / math.sin(1.0), abs=1e-8)

    assert run(["sigma", "--kappa", str(tables["long"]), "--theta", "3.2", "--t", "0.5"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "inf"


def test_sigma_domain_error_exits_two(tables, capsys) -> None:
    code = run(["sigma", "--kappa", str(tables["long"]), "--theta", "1.0", "--t", "1.5"])
    assert code == EXIT_ERROR
    payload = json.loads(capsys.readouterr().out)
    assert payload["error"]["type"] == "DOMAIN_ERROR"


def test_bad_table_reports_the_line(write_table, capsys) -> None:
    bad = write_table("bad.csv", ("x", "kappa"), [(0.0, 1.0)])
    bad.write_text("x,kappa\n0,1\nzero,1\n1,1\n", encoding="utf-8")
    assert run(["sigma", "--kappa", str(bad), "--theta", "0.5", "--t", "0.5"]) == EXIT_ERROR
    payload = json.loads(capsys.readouterr().out)
    assert payload["error"]["type"] == "VALIDATION_TABLE_ERROR"
    assert payload["error"]["details"]["line"] == 3


# ----------------------------------------------------------------------
# certify / flow
# ----------------------------------------------------------------------


def test_certify_pass_and_fail(tables, capsys) -> None:
    args = ["certify", "--S", str(tables["S"]), "--N", "inf"]
    assert run(args + ["--kappa", str(tables["unit"])]) == EXIT_OK
    assert capsys.readouterr().out.startswith("pass ")

    assert run(args + ["--kappa", str(tables["over"])]) == EXIT_FAIL
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "fail"
    assert payload["witness"]["N"] == "inf"
    assert payload["witness"]["worst_margin"] < 0
    assert payload["witness"]["worst_witness"]["margin"] == payload["witness"]["worst_margin"]


def test_flow_evi_report(tables, capsys) -> None:
    base = ["flow", "--f", str(tables["f"]), "--N", "inf", "--x0", "1", "--horizon", "1"]
    code = run(base + ["--kappa", str(tables["unit"]), "--report", "evi", "--z", "2", "--check"])
    assert code == EXIT_OK
    out = lines(capsys.readouterr().out)
    assert out[0] == "s,value,bound,margin"
    assert len(out) > 2

    code = run(base + ["--kappa", str(tables["over"]), "--z", "3", "--check"])
    assert code == EXIT_FAIL
    payload = json.loads(capsys.readouterr().out)
    assert payload["witness"]["report"] == "evi"
    assert payload["witness"]["margin"] < -payload["witness"]["tol"]


def test_flow_needs_its_points(tables, capsys) -> None:
    base = ["flow", "--f", str(tables["f"]), "--kappa", str(tables["unit"]), "--N", "inf"]
    base += ["--x0", "1", "--horizon", "1"]
    assert run(base + ["--report", "evi"]) == EXIT_ERROR
    assert run(base + ["--report", "contraction"]) == EXIT_ERROR
    capsys.readouterr()


def test_flow_dissipation_and_contraction_json(tables, capsys) -> None:
    base = ["flow", "--f", str(tables["f"]), "--kappa", str(tables["unit"]), "--N", "inf"]
    base += ["--x0", "1", "--horizon", "0.5", "--json"]
    assert run(base + ["--report", "dissipation", "--check"]) == EXIT_OK
    rows = json.loads(capsys.readouterr().out)
    assert rows[0]["s"] == 0.0
    assert set(rows[0]) == {"s", "value", "bound", "margin"}

    code = run(base + ["--report", "contraction", "--y0", "-0.5", "--dt", "5e-4", "--check"])
    assert code == EXIT_OK
    rows = json.loads(capsys.readouterr().out)
    assert min(row["margin"] for row in rows) >= -1e-4


# ----------------------------------------------------------------------
# cde / bg
# ----------------------------------------------------------------------


def test_cde_on_flat_space(tables, capsys) -> None:
    args = ["cde", "--space", str(tables["space"]), "--mu0", str(tables["mu0"])]
    args += ["--mu1", str(tables["mu1"]), "--N", "3", "--json"]
    assert run(args + ["--kappa", str(tables["flat"])]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "pass"
    assert payload["theta"] == pytest.approx(4.0, abs=1e-3)

    assert run(args + ["--kappa", str(tables["flat"]), "--per-particle"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["criterion"] == "density"


def test_bg_pass_and_fail(tables, capsys) -> None:
    args = ["bg", "--space", str(tables["space"]), "--x0", "5", "--r", "1", "--R", "2", "--N", "2"]
    assert run(args + ["--kappa-lower", "0"]) == EXIT_OK
    out = lines(capsys.readouterr().out)
    assert out[0] == "x0,r,R,s_ratio,model_s_ratio,v_ratio,model_v_ratio,ok"
    assert out[1].endswith("true")

    assert run(args + ["--kappa-lower", "1.5", "--profile", "sharp"]) == EXIT_FAIL
    payload = json.loads(capsys.readouterr().out)
    assert payload["witness"]["ok"] is False


# ----------------------------------------------------------------------
# sweep
# ----------------------------------------------------------------------


def write_config(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def test_sweep_sigma_flags_infinite(tmp_path, tables, capsys) -> None:
    cfg = write_config(
        tmp_path / "sigma.env",
        f"checker=sigma\nkappa={tables['long'].name}\ntheta=1.0,3.5\nt=0.5\n",
    )
    assert run(["sweep", "--config", str(cfg)]) == EXIT_OK
    out = lines(capsys.readouterr().out)
    assert out[0] == "theta,t,value,finite"
    assert out[1].endswith(",true")
    assert out[2] == "3.5,0.5,inf,false"


def test_sweep_empty_grid_writes_header_only(tmp_path, tables, capsys) -> None:
    cfg = write_config(tmp_path / "empty.env", f"checker=sigma\nkappa={tables['long'].name}\ntheta=\nt=0.5\n")
    assert run(["sweep", "--config", str(cfg)]) == EXIT_OK
    assert lines(capsys.readouterr().out) == ["theta,t,value,finite"]


def test_sweep_contraction_writes_csv_and_summary(tmp_path, capsys) -> None:
    cfg = write_config(
        tmp_path / "contraction.env",
        "checker=contraction\nkappa_value=1\nx0=1\ny0=-0.5\nN=inf\nhorizon=0.5\ndt=5e-4\n",
    )
    output = tmp_path / "out" / "contraction.csv"
    assert run(["sweep", "--config", str(cfg), "--output", str(output)]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["cells"] == 1 and summary["failures"] == 0
    assert lines(output.read_text(encoding="utf-8"))[0] == "lambda,N,min_margin,worst_time"
    on_disk = json.loads((tmp_path / "out" / "contraction.summary.json").read_text(encoding="utf-8"))
    assert on_disk == summary


def test_sweep_is_deterministic_across_thread_counts(tmp_path, capsys) -> None:
    cfg = write_config(
        tmp_path / "evi.env",
        "checker=evi\nkappa_value=1\nN=inf\nx0=1\nsamples=3\nseed=7\nhorizon=0.5\ndt=1e-3\n",
    )
    assert run(["sweep", "--config", str(cfg), "--threads", "1"]) == EXIT_OK
    single = capsys.readouterr().out
    assert run(["sweep", "--config", str(cfg), "--threads", "4"]) == EXIT_OK
    assert capsys.readouterr().out == single
    assert len(lines(single)) == 4


def test_sweep_failures_exit_one(tmp_path, capsys) -> None:
    cfg = write_config(
        tmp_path / "bad.env",
        "checker=evi\nkappa_value=1.5\nN=inf\nx0=1\nz=3\nhorizon=0.5\ndt=1e-3\n",
    )
    assert run(["sweep", "--config", str(cfg)]) == EXIT_FAIL
    payload = json.loads(capsys.readouterr().out)
    assert payload["witness"]["failures"] == 1
    assert payload["witness"]["min_margin"] < 0


def test_sweep_invalid_config_exits_two(tmp_path, capsys) -> None:
    cfg = write_config(tmp_path / "bogus.env", "checker=bogus\n")
    assert run(["sweep", "--config", str(cfg)]) == EXIT_ERROR
    payload = json.loads(capsys.readouterr().out)
    assert payload["error"]["type"] == "DOMAIN_ERROR"
    assert run(["sweep", "--config", str(tmp_path / "missing.env")]) == EXIT_ERROR
    capsys.readouterr()
