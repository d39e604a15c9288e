"""End-to-end command line runs through main(argv)."""

import math

import pytest

from graphvar import read_solution
from graphvar.cli import main


@pytest.fixture()
def path_problem(tmp_path):
    """Generated unit path with a linear problem config; returns arg helpers."""
    graph = tmp_path / "graph.tsv"
    measure = tmp_path / "measure.tsv"
    rc = main(
        [
            "generate",
            "--kind",
            "path:41",
            "--out-graph",
            str(graph),
            "--out-measure",
            str(measure),
        ]
    )
    assert rc == 0
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "equation = schrodinger\ncenter = v20\nh = const:1\nf = dirac:v20:3\n"
        "k_min = 3\nk_max = 30\ntol = 1e-8\nmu0 = 1\nw0 = 1\np = 3\n"
    )
    def args(cmd, *extra):
        return [cmd, "--graph", str(graph), "--measure", str(measure), "--config", str(cfg), *extra]
    return tmp_path, args


def test_generate_prints_origin(tmp_path, capsys):
    rc = main(
        [
            "generate",
            "--kind",
            "grid:3x3",
            "--out-graph",
            str(tmp_path / "g.tsv"),
            "--out-measure",
            str(tmp_path / "m.tsv"),
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0
    assert "origin r1c1" in out
    assert "vertices 9 edges 12" in out


def test_solve_writes_report_and_solution(path_problem, capsys):
    tmp_path, args = path_problem
    report = tmp_path / "report.txt"
    out = tmp_path / "u.tsv"
    rc = main(args("solve", "--report", str(report), "--out", str(out)))
    assert rc == 0
    assert capsys.readouterr().out.startswith("CONVERGED k=")
    text = report.read_text()
    assert text.splitlines()[0].startswith("equation=schrodinger vertices=41")
    assert "coefficient f=dirac:v20:3" in text
    values = read_solution(str(out))
    assert set(values) == {f"v{i:02d}" for i in range(41)}
    assert values["v20"] == pytest.approx(3.0 / math.sqrt(5.0), abs=1e-7)
    assert values["v00"] == 0.0  # outside the witness ball


def test_solve_reports_are_byte_identical(path_problem):
    tmp_path, args = path_problem
    r1, r2 = tmp_path / "r1.txt", tmp_path / "r2.txt"
    assert main(args("solve", "--report", str(r1))) == 0
    assert main(args("solve", "--report", str(r2))) == 0
    assert r1.read_bytes() == r2.read_bytes()


def test_solve_parallel_agrees(path_problem):
    tmp_path, args = path_problem
    out_seq, out_par = tmp_path / "s.tsv", tmp_path / "p.tsv"
    assert main(args("solve", "--out", str(out_seq))) == 0
    assert main(args("solve", "--out", str(out_par), "--parallel-levels")) == 0
    seq, par = read_solution(str(out_seq)), read_solution(str(out_par))
    assert all(par[x] == pytest.approx(seq[x], abs=1e-9) for x in seq)


def test_solve_figures(path_problem):
    tmp_path, args = path_problem
    figs = tmp_path / "figs"
    figs.mkdir()
    assert main(args("solve", "--figures", str(figs))) == 0
    names = sorted(p.name for p in figs.iterdir())
    assert names == ["solve_levels.png", "solve_profile.png"]
    assert all((figs / n).stat().st_size > 0 for n in names)


def test_solve_nonconvergence_exits_2(path_problem, capsys):
    tmp_path, args = path_problem
    cfg = tmp_path / "tight.cfg"
    cfg.write_text(
        "equation = schrodinger\ncenter = v20\nh = const:1\nf = dirac:v20:3\n"
        "k_min = 3\nk_max = 4\ntol = 1e-10\n"
    )
    rc = main(
        [
            "solve",
            "--graph",
            str(tmp_path / "graph.tsv"),
            "--measure",
            str(tmp_path / "measure.tsv"),
            "--config",
            str(cfg),
        ]
    )
    assert rc == 2
    assert capsys.readouterr().out.splitlines()[-1].startswith("NO-CONVERGENCE")


def test_input_errors_exit_1(path_problem, capsys):
    tmp_path, args = path_problem
    bad = tmp_path / "bad.cfg"
    bad.write_text("equation = schrodinger\ncenter = nowhere\nh = const:1\nf = const:0\n")
    rc = main(
        [
            "solve",
            "--graph",
            str(tmp_path / "graph.tsv"),
            "--config",
            str(bad),
        ]
    )
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_verify_embeddings_all_pass(path_problem, capsys):
    tmp_path, args = path_problem
    rc = main(args("verify-embeddings", "--samples", "25", "--seed", "7"))
    out = capsys.readouterr().out
    assert rc == 0
    assert "embedding-summary failures=0 ok=true" in out
    assert "check=sup-from-w12" in out or "check=sup" in out
    assert "trudinger-moser" in out


def test_geometry_requires_yamabe(path_problem, capsys):
    tmp_path, args = path_problem
    rc = main(args("geometry"))
    assert rc == 1
    assert "yamabe" in capsys.readouterr().err


def test_geometry_on_yamabe(path_problem, capsys):
    tmp_path, args = path_problem
    cfg = tmp_path / "yam.cfg"
    cfg.write_text(
        "equation = yamabe\ncenter = v20\nh = const:1\nq = 4\nk_min = 3\nk_max = 10\n"
    )
    rc = main(
        [
            "geometry",
            "--graph",
            str(tmp_path / "graph.tsv"),
            "--config",
            str(cfg),
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0
    assert "geometry ok=true" in out
    assert "nehari_defect=" in out


def test_poincare_schedule(path_problem, capsys):
    tmp_path, args = path_problem
    rc = main(args("poincare"))
    out = capsys.readouterr().out
    assert rc == 0
    lines = [l for l in out.splitlines() if l.startswith("poincare ")]
    assert lines and lines[0].startswith("poincare k=3 constant=")
    assert "nondecreasing ok=true" in out


def test_poincare_stops_when_ball_covers_graph(tmp_path, capsys):
    graph = tmp_path / "g.tsv"
    measure = tmp_path / "m.tsv"
    main(["generate", "--kind", "path:9", "--out-graph", str(graph), "--out-measure", str(measure)])
    cfg = tmp_path / "p.cfg"
    cfg.write_text("equation = schrodinger\ncenter = v4\nh = const:1\nf = const:0\nk_min = 3\nk_max = 12\n")
    rc = main(["poincare", "--graph", str(graph), "--config", str(cfg)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "stopped k=5 reason=ball-covers-graph" in out
