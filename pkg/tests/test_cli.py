from __future__ import annotations
from pathlib import Path
import subprocess
import sys
import os

import pytest

from graph_pressure.cli import build_parser, main


def _run(*args: str, cwd: Path | None = None) -> subprocess.CompletedProcess:
    env = os.environ.copy()
    repo_root = Path(__file__).resolve().parents[1]
    pythonpath = str(repo_root / "src")
    env["PYTHONPATH"] = (pythonpath + os.pathsep + env.get("PYTHONPATH", "")) if env.get("PYTHONPATH") else pythonpath
    env["NO_COLOR"] = "1"
    cmd = [sys.executable, "-m", "graph_pressure.cli", *args]
    return subprocess.run(cmd, capture_output=True, text=True, env=env, cwd=str(cwd) if cwd else None)


def test_cli_entropy_smoke():
    p = _run("entropy", "--example", "figure8", "--lengths", "e1=1,e2=1")
    assert p.returncode == 0, p.stderr
    assert p.stdout.strip() == "1.09861228866811"


def test_cli_entropy_from_graph_file(graph_file):
    path = graph_file("# figure 8\nvertex a\nedge e1 a a\nedge e2 a a\n")
    p = _run("entropy", "--graph", str(path), "--lengths", "e1=2,e2=2")
    assert p.returncode == 0, p.stderr
    assert float(p.stdout) == pytest.approx(0.549306144334055, rel=1e-12)


def test_cli_normalize(capsys):
    assert main(["normalize", "--example", "figure8", "--lengths", "e1=1,e2=1"]) == 0
    out = capsys.readouterr().out.strip()
    assert out == "e1=1.09861228866811,e2=1.09861228866811"


def test_cli_surface_and_tensor(capsys):
    assert main(["surface", "--example", "belt-buckle", "--free", "e1=0.6931471805599453,e2=0.6931471805599453"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.693147180559945, rel=1e-12)

    assert main(["tensor", "--example", "belt-buckle", "--free", "e1=0.6931471805599453,e2=0.6931471805599453"]) == 0
    lines = dict(line.split(" ", 1) for line in capsys.readouterr().out.splitlines())
    assert set(lines) == {"E", "F", "G", "V"}
    assert float(lines["E"]) == pytest.approx(2 / 9, rel=1e-8)
    assert float(lines["F"]) == pytest.approx(1 / 9, rel=1e-8)

    assert main(["tensor", "--example", "figure8", "--free", "e1=1.0986122886681098", "--metric", "WP"]) == 0
    lines = dict(line.split(" ", 1) for line in capsys.readouterr().out.splitlines())
    assert set(lines) == {"E", "V"}
    assert float(lines["E"]) == pytest.approx(1 / (2 * 1.0986122886681098), rel=1e-8)


def test_cli_dependent_edge_flag(capsys):
    # free e2, e3; solve for e1
    assert main(["surface", "--example", "dumbbell", "--dep", "e1",
                 "--free", "e2=0.6931471805599453,e3=0.6931471805599453"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.693147180559945, rel=1e-10)


def test_cli_curvature_at_point(capsys):
    assert main(["curvature", "--example", "dumbbell", "--at", "0.6931471805599453,0.6931471805599453"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(7 / 6, abs=1e-5)


def test_cli_curvature_grid_csv(tmp_path):
    out = tmp_path / "grid.csv"
    p = _run("curvature", "--example", "belt-buckle", "--metric", "WP", "--grid", "0.5:2:2,0.5:2:2",
             "--out", str(out), "--quiet")
    assert p.returncode == 0, p.stderr
    assert p.stdout.strip() == str(out)
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "x,y,K"
    assert len(lines) == 5
    # (2, 2) is outside the feasible region
    assert lines[-1] == "2,2,NA"
    assert float(lines[1].split(",")[2]) < 0


def test_cli_curvature_grid_to_stdout(capsys):
    assert main(["curvature", "--example", "dumbbell", "--grid", "0.5:0.5:1,0.4:0.6:2", "--quiet"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "x,y,K"
    assert [ln.split(",")[:2] for ln in lines[1:]] == [["0.5", "0.4"], ["0.5", "0.6"]]


def test_cli_completeness_subcommand(capsys):
    assert main(["probe", "--example", "figure8", "--path", "axis:e1", "--toward", "0"]) == 0
    lines = dict(line.split(" ", 1) for line in capsys.readouterr().out.splitlines())
    assert lines["kind"] == "finite"
    assert float(lines["length"]) > 0

    assert main(["probe", "--example", "figure8", "--metric", "WP", "--toward", "inf",
                 "--from", "2", "--window", "2:20"]) == 0
    lines = dict(line.split(" ", 1) for line in capsys.readouterr().out.splitlines())
    assert lines["kind"] == "divergent"
    assert lines["length"] == "NA"


def test_cli_verify_writes_csv(tmp_path):
    csv_path = tmp_path / "report.csv"
    p = _run("verify", "--example", "dumbbell", "--csv", str(csv_path), "--quiet")
    assert p.returncode == 0, p.stdout + p.stderr
    assert p.stdout.startswith("dumbbell: PASS")
    rows = csv_path.read_text(encoding="utf-8").splitlines()
    assert rows[0] == "example,check,expected,got,tolerance,status"
    assert all(r.endswith(",PASS") for r in rows[1:])


@pytest.mark.parametrize(
    "args, code, message",
    [
        (["entropy", "--example", "figure8"], 2, "--lengths is required"),
        (["entropy", "--example", "figure8", "--lengths", "e1=1,e1=2"], 2, "given twice"),
        (["entropy", "--example", "figure8", "--lengths", "e1=1,e2=0"], 2, "strictly positive"),
        (["entropy", "--example", "figure8", "--lengths", "e1=1,e2=1", "--tol", "bogus=1"], 2, "unknown tolerance"),
        (["surface", "--example", "belt-buckle", "--free", "e1=2,e2=2"], 1, "infeasible"),
        (["surface", "--example", "belt-buckle", "--free", "e1=1"], 2, "every edge but one"),
        (["curvature", "--example", "figure8", "--at", "1,1"], 2, "three edges"),
        (["curvature", "--example", "dumbbell"], 2, "--grid or --at"),
        (["curvature", "--example", "dumbbell", "--grid", "0:1:2"], 2, "two axes"),
        (["probe", "--example", "figure8", "--toward", "inf"], 2, "explicit sample window"),
        (["probe", "--example", "figure8", "--path", "axis:e9"], 2, "not a free edge"),
        (["verify", "--graph", "x.graph"], 2, "catalog examples only"),
    ],
)
def test_cli_errors(capsys, args, code, message):
    assert main(args) == code
    assert message in capsys.readouterr().err


def test_cli_missing_graph_file(tmp_path, capsys):
    assert main(["entropy", "--graph", str(tmp_path / "none.graph"), "--lengths", "e1=1"]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_cli_requires_a_source():
    p = _run("entropy", "--lengths", "e1=1")
    assert p.returncode == 2
    assert "one of --example or --graph is required" in p.stderr


def test_cli_rejects_both_sources():
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["entropy", "--example", "figure8", "--graph", "g.graph"])
    assert exc.value.code == 2


def test_cli_rejects_unknown_example():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["entropy", "--example", "theta"])


def test_cli_help_lists_commands():
    p = _run("--help")
    assert p.returncode == 0
    for cmd in ("entropy", "normalize", "surface", "tensor", "curvature", "probe", "verify"):
        assert cmd in p.stdout
