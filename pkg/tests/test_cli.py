import json
import math
import subprocess
import sys

import pytest

from dbridge.cli import EXIT_INPUT, EXIT_IO, EXIT_OK, EXIT_PRECISION, run


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    head = lines[0].split(",")
    return [dict(zip(head, ln.split(","))) for ln in lines[1:]]


def test_spectrum_one_third(capsys):
    code, out, _ = call(capsys, "spectrum", "--alpha", "1/3", "--nmax", "10")
    assert code == EXIT_OK
    rows = csv_rows(out)
    iso = sorted({int(r["n"]) for r in rows if r["branch"] == "false"})
    assert iso == [1, 2, 4, 5, 7, 8, 10]
    assert [int(r["n"]) for r in rows if r["branch"] == "true"] == [3, 6, 9]
    assert out.splitlines()[-1] == "# isolated=14 branch_plus=3 branch_minus=0"


def test_spectrum_irrational_json(capsys):
    code, out, _ = call(capsys, "spectrum", "--alpha", "inv_sqrt5", "--nmax", "5", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK and len(doc["rows"]) == 10 and doc["summary"]["isolated"] == 10


def test_spectrum_one_half(capsys):
    _, out, _ = call(capsys, "spectrum", "--alpha", "1/2", "--nmax", "4")
    rows = csv_rows(out)
    assert [(r["family"], r["n"]) for r in rows] == [("minus", "1"), ("plus", "2"), ("minus", "3"), ("plus", "4")]


def test_scan_table(capsys):
    code, out, _ = call(capsys, "scan", "--alpha", "inv_sqrt5", "--nmax", "200000", "--digits", "20", "--threads", "2")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "n,xi_tilde,omega_plus,omega_minus,in_I_plus,in_I_minus"
    assert lines[2].startswith("19,-0.055892024515183919258,")
    assert all(ln.split(",")[4] == "true" for ln in lines[1:])


def test_scan_json_report(capsys):
    code, out, _ = call(capsys, "scan", "--alpha", "inv_sqrt3", "--nmax", "1000000", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert len(doc["hits"]) == 11 and len(doc["clusters"]) == 2 and doc["outliers"] == [84]
    # the interval bound is asymptotic; the first Hurwitz index of 1/sqrt3 lies outside
    assert [h["n"] for h in doc["hurwitz"] if not h["in_I_minus"]] == [1]


def test_scan_rational(capsys):
    code, out, _ = call(capsys, "scan", "--alpha", "1/3", "--nmax", "100", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK and [h["n"] for h in doc["hits"]] == [1] and "hurwitz" not in doc


def test_output_file_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["scan", "--alpha", "inv_one_plus_sqrt5", "--nmax", "300000"]
    assert run(base + ["--threads", "1", "--output", str(a)]) == EXIT_OK
    assert run(base + ["--threads", "8", "--output", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert capsys.readouterr().out == ""


def test_profile_csv(capsys):
    code, out, _ = call(capsys, "profile", "--alpha", "inv_sqrt5", "--family", "plus", "--n", "19", "--grid", "512")
    rows = csv_rows(out)
    assert code == EXIT_OK and len(rows) == 4 * 512
    omega = -0.59066380782249162
    assert float(rows[0]["u"]) == pytest.approx(math.sqrt(2 * abs(omega)), rel=1e-12)


def test_profile_branch_validate(capsys):
    code, out, _ = call(
        capsys, "profile", "--alpha", "1/2", "--branch", "--n", "1", "--omega", "-1", "--format", "json", "--validate"
    )
    doc = json.loads(out)
    assert code == EXIT_OK and doc["branch"] == "branch" and doc["omega"] == -1
    assert doc["kirchhoff_continuity"] < 1e-12 and doc["ode"] <= doc["ode_bound"] * 1.05


def test_profile_validate_csv_footer(capsys):
    _, out, _ = call(capsys, "profile", "--alpha", "inv_sqrt3", "--n", "2", "--family", "minus", "--grid", "4", "--validate")
    assert out.splitlines()[0] == "edge,x,u,du"
    assert out.splitlines()[-5].startswith("# kirchhoff_continuity=")


def test_construct_alpha(capsys):
    code, out, _ = call(capsys, "construct-alpha", "--ell", "5.25", "--depth", "12", "--terminate", "--omega0")
    rows = csv_rows(out)
    assert code == EXIT_OK and len(rows) == 12
    errs = [float(r["error"]) for r in rows]
    assert errs == sorted(errs, reverse=True) and errs[-1] == 0.0
    assert any(ln.startswith("# omega0=") for ln in out.splitlines())


def test_construct_alpha_json(capsys):
    code, out, _ = call(capsys, "construct-alpha", "--ell", "0", "--depth", "8", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK and len(doc["rows"]) == 8 and doc["rows"][-1]["error"] < 1e-20


def test_linear(capsys):
    _, out, _ = call(capsys, "linear", "--alpha", "1/2", "--L", "6.283185307179586", "--nmax", "3")
    assert [float(r["lam"]) for r in csv_rows(out)] == pytest.approx([1, 4, 9], rel=1e-14)
    _, out, _ = call(capsys, "linear", "--alpha", "inv_sqrt5")
    assert out.splitlines() == ["n,lam,q0", "# no eigenvalues"]
    _, out, _ = call(capsys, "linear", "--alpha", "1/3", "--bifurcate", "--n", "1", "--eps", "1e-8")
    assert abs(float(csv_rows(out)[0]["amplitude_ratio"]) - 1) < 1e-3


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nalpha = 1/3\nnmax = 4\nformat = json\n")
    code, out, _ = call(capsys, "spectrum", "--config", str(cfg), "--nmax", "6")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["alpha"] == "1/3" and max(r["n"] for r in doc["rows"]) == 6
    cfg.write_text("validate = yes\nalpha = inv_sqrt5\nn = 1\ngrid = 2\n")
    code, out, _ = call(capsys, "profile", "--config", str(cfg))
    assert code == EXIT_OK and "# ode=" in out


def test_catalog_flag(tmp_path, capsys):
    cat = tmp_path / "cat.txt"
    cat.write_text("root2 quad 0 1 2 2\n")
    code, out, _ = call(capsys, "spectrum", "--alpha", "root2", "--catalog", str(cat), "--nmax", "1")
    assert code == EXIT_OK and len(csv_rows(out)) == 2


@pytest.mark.parametrize(
    "argv,code",
    [
        (["spectrum", "--alpha", "foo"], EXIT_INPUT),
        (["spectrum"], EXIT_INPUT),
        (["spectrum", "--alpha", "1/3", "--nmax", "0"], EXIT_INPUT),
        (["spectrum", "--alpha", "1/3", "--nmax", "20000000"], EXIT_INPUT),
        (["spectrum", "--alpha", "1/3", "--bogus"], EXIT_INPUT),
        (["nope"], EXIT_INPUT),
        ([], EXIT_INPUT),
        (["profile", "--alpha", "1/3", "--n", "3"], EXIT_INPUT),
        (["profile", "--alpha", "1/2", "--branch", "--n", "1"], EXIT_INPUT),
        (["linear", "--alpha", "1/3", "--bifurcate"], EXIT_INPUT),
        (["construct-alpha", "--ell", "-1", "--depth", "3"], EXIT_INPUT),
        (["scan", "--alpha", "1/3", "--threads", "0"], EXIT_INPUT),
        (["scan", "--alpha", "1/3", "--nmax", "10", "--output", "/nonexistent/dir/x.csv"], EXIT_IO),
        (["spectrum", "--alpha", "1/3", "--config", "/nonexistent.cfg"], EXIT_IO),
        (["scan", "--alpha", "inv_sqrt5", "--nmax", "1000", "--precision-bits", "4"], EXIT_PRECISION),
    ],
)
def test_error_paths(argv, code, capsys):
    got, out, err = call(capsys, *argv)
    assert got == code
    assert err.count("\n") == 1 and err.startswith("dbridge:")


def test_bad_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("colour = red\n")
    assert call(capsys, "spectrum", "--alpha", "1/3", "--config", str(cfg))[0] == EXIT_INPUT


def test_precision_env(monkeypatch, capsys):
    monkeypatch.setenv("DB_PRECISION_BITS", "4")
    assert call(capsys, "scan", "--alpha", "inv_sqrt5", "--nmax", "1000")[0] == EXIT_PRECISION


def test_precision_flag_restores_env(monkeypatch, capsys):
    monkeypatch.delenv("DB_PRECISION_BITS", raising=False)
    call(capsys, "scan", "--alpha", "inv_sqrt5", "--nmax", "10", "--precision-bits", "100")
    import os

    assert "DB_PRECISION_BITS" not in os.environ


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "dbridge.cli", "linear", "--alpha", "1/2", "--nmax", "1"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("n,lam,q0")
