import json
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from pmelab.cli import ConfigError, main, parse_config, read_field_csv

SOLVE = """
[manifold]
kind = "hyperbolic"
N = 3

[problem]
m = 2
atom = 1.0
R = 4.0
eps = 0.1

[solver]
t_end = 0.1
cells = 200
t_first = 0.01
snapshots_per_decade = 2
"""


def write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_minimal_config_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, "[manifold]\nkind = 'euclidean'\n"))
    assert cfg.profile.kind == "euclidean" and cfg.profile.N == 3
    assert cfg.m == 2.0 and cfg.measure.atom == 1.0
    assert cfg.R_schedule == [8.0] and cfg.solver.m == 2.0


def test_errors_are_collected_with_line_numbers(tmp_path):
    path = write(tmp_path, """
        [manifold]
        kind = "euclidean"
        N = 1

        [problem]
        m = 0.8
        colour = "red"

        [solver]
        cells = "many"
        """)
    with pytest.raises(ConfigError) as info:
        parse_config(path)
    errors = info.value.errors
    assert len(errors) == 4
    text = "\n".join(errors)
    assert "N must be at least 2" in text and "m must exceed 1" in text
    assert "line 8: problem.colour: unknown key" in text
    assert "line 11: solver.cells: expected integer, got str" in text


def test_invalid_config_exit_code(tmp_path, capsys):
    path = write(tmp_path, "[problem]\nm = 0.8\n")
    code, out, err = run(["solve", "--config", path, "--out", str(tmp_path / "o")], capsys)
    assert code == 1 and "m must exceed 1" in err and out == ""
    assert json.loads(err.strip().splitlines()[-1])["exit_code"] == 1


def test_solve_outputs_and_reproducibility(tmp_path, capsys):
    path = write(tmp_path, SOLVE)
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        code, out, _ = run(["solve", "--config", path, "--out", str(o)], capsys)
        assert code == 0 and json.loads(out)["status"] == "ok"
    a, b = outs
    assert (a / "snapshots" / "u_0000.csv").read_text().splitlines()[0] == "r,u"
    assert (a / "snapshot_times.csv").read_text().splitlines()[0] == "index,t"
    diag = (a / "diagnostics.csv").read_text().splitlines()
    assert diag[0] == "t,mass,linf,lmp1,dissipation,boundary_flux"
    summary = json.loads((a / "summary.json").read_text())
    assert abs(summary["mass_final"] - 1.0) < 1e-10 and not summary["aborted"]
    for f in a.rglob("*"):
        if f.is_file() and f.name != "summary.json":
            assert f.read_bytes() == (b / f.relative_to(a)).read_bytes(), f.name
    # the final snapshot round-trips through the field reader
    last = sorted((a / "snapshots").iterdir())[-1]
    field = read_field_csv(str(last))
    assert np.sum(field.values * np.diff(field.edges)) > 0


def test_green_on_parabolic_manifold(tmp_path, capsys):
    path = write(tmp_path, "[manifold]\nkind = 'euclidean'\nN = 2\n")
    code, out, err = run(["green", "--config", path, "--out", str(tmp_path / "o")], capsys)
    assert code == 2 and "manifold is parabolic" in err


def test_green_csv(tmp_path, capsys):
    path = write(tmp_path, "[manifold]\nkind = 'euclidean'\n[green]\nsamples = 5\nr_min = 1.0\nr_max = 2.0\n")
    code, _, _ = run(["green", "--config", path, "--out", str(tmp_path)], capsys)
    assert code == 0
    data = np.loadtxt(tmp_path / "green.csv", delimiter=",", skiprows=1)
    assert np.allclose(data[:, 1], 1 / (4 * np.pi * data[:, 0]), rtol=1e-12)


def test_meanvalue_of_atom(tmp_path, capsys):
    path = write(tmp_path, "[manifold]\nkind = 'euclidean'\n[meanvalue]\nsamples = 6\n")
    code, out, _ = run(["meanvalue", "--config", path, "--out", str(tmp_path)], capsys)
    assert code == 0 and json.loads(out)["monotone"]
    data = np.loadtxt(tmp_path / "meanvalue.csv", delimiter=",", skiprows=1)
    r, m_r, M_r = data.T
    assert np.allclose(m_r, 1 / r, rtol=1e-10) and np.allclose(M_r, 2 / r, rtol=1e-10)


def test_verify_geometry(tmp_path, capsys):
    code, out, err = run(["verify", "--suite", "geometry", "--out", str(tmp_path)], capsys)
    assert code == 0 and "PASS green_closed_forms" in err
    reports = json.loads((tmp_path / "verify_report.json").read_text())
    assert all(r["passed"] for r in reports)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "pmelab", "verify", "--suite", "geometry", "--quiet",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stderr == ""
    assert json.loads(proc.stdout)["checks"] == 2
