import json
import subprocess
import sys

import pytest

from fplab import cli, engine, generators


def run(argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def g4_file(tmp_path):
    path = tmp_path / "g4.fpg"
    assert run(["gen", "--family", "gn", "--n", 4, "--k", 2, "-o", path]) == 0
    return path


def test_gen_gn_banner(tmp_path, capsys):
    path = tmp_path / "g5.fpg"
    assert run(["gen", "--family", "gn", "--n", 5, "--k", 2, "-o", path]) == 0
    out = capsys.readouterr().out
    assert "alpha=3/2 beta=3/4 rho=3/2" in out and "delta_equiv" in out
    assert generators.read_game(path) == generators.build_gn(generators.gn_params(5, 2))


@pytest.mark.parametrize("family", ["shapley", "mp"])
def test_gen_fixed(tmp_path, family):
    assert run(["gen", "--family", family, "-o", tmp_path / "x.fpg"]) == 0


def test_gen_random(tmp_path):
    path = tmp_path / "r.fpg"
    assert run(["gen", "--family", "random", "--seed", 1, "--size", "2x2", "--denom-bits", 20, "-o", path]) == 0
    assert generators.read_game(path) == generators.build_random(1, 2, 2, 20)


@pytest.mark.parametrize("extra", [
    ["--family", "gn", "--n", "5", "--k", "1"],
    ["--family", "gn", "--n", "5"],
    ["--family", "random", "--seed", "1"],
    ["--family", "random", "--seed", "1", "--size", "2by2"],
])
def test_gen_usage_errors(tmp_path, extra):
    assert run(["gen", *extra, "-o", tmp_path / "x"]) == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as err:
        run(["gen", "--family", "nope", "-o", "x"])
    assert err.value.code == 2


def test_run_outputs(tmp_path, g4_file):
    trace, stats = tmp_path / "t.csv", tmp_path / "s.json"
    assert run(["run", "--game", g4_file, "--steps", 5000, "--trace-out", trace, "--stats-out", stats]) == 0
    assert trace.read_text().startswith("row_action,col_action,length\n1,1,1\n")
    data = json.loads(stats.read_text())
    assert data["t"] == 5000 and "steps" in data["ties"]
    game = generators.read_game(g4_file)
    assert engine.Trace.from_csv(trace.read_text()) == engine.simulate(game, 5000).trace


def test_run_start_flag_is_one_based(tmp_path):
    path = tmp_path / "s.fpg"
    run(["gen", "--family", "shapley", "-o", path])
    trace = tmp_path / "t.csv"
    assert run(["run", "--game", path, "--steps", 3, "--start", "1,2", "--trace-out", trace]) == 0
    assert trace.read_text().split("\n")[1].startswith("1,2,")


def test_run_usage_errors(tmp_path, g4_file):
    assert run(["run", "--game", g4_file, "--steps", 10, "--start", "17,1"]) == 2
    assert run(["run", "--game", g4_file, "--steps", 10, "--start", "x"]) == 2
    assert run(["run", "--game", tmp_path / "missing.fpg", "--steps", 10]) == 2
    assert run(["run", "--game", g4_file, "--steps", 2 * 10**6, "--expand", tmp_path / "e.csv"]) == 2


def test_run_expand(tmp_path, g4_file):
    out = tmp_path / "e.csv"
    assert run(["run", "--game", g4_file, "--steps", 30, "--expand", out]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,row_action,col_action" and len(lines) == 31 and lines[1] == "1,1,1"


def test_analyze_to_stdout(tmp_path, g4_file, capsys):
    trace = tmp_path / "t.csv"
    run(["run", "--game", g4_file, "--steps", 10**5, "--trace-out", trace])
    capsys.readouterr()
    assert run(["analyze", "--game", g4_file, "--trace", trace, "--report", "-"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["t_star"] == 1513
    assert rep["checks"]["structure"] == "pass" and rep["checks"]["recurrences"] == "pass"


def test_bounds_epsilon_star(capsys):
    assert run(["bounds", "--epsilon-star", "--t", 100, "--n", 10]) == 0
    assert capsys.readouterr().out.strip() == "23/50 (0.46)"
    assert run(["bounds", "--epsilon-star", "--t", 101, "--n", 10]) == 2


def test_bounds_min_s(capsys):
    assert run(["bounds", "--min-s", "--t", 5, "--n", 2]) == 0
    assert capsys.readouterr().out == "t,n,min_S,composition\n5,2,19,2-3\n5,2,19,3-2\n"
    assert run(["bounds", "--min-s", "--t", 6, "--n", 3, "--exhaustive"]) == 0
    assert "6,3,24,2-2-2" in capsys.readouterr().out
    assert run(["bounds", "--min-s", "--t", 50, "--n", 3]) == 2


def test_bounds_certify(tmp_path, capsys):
    game, trace = tmp_path / "r.fpg", tmp_path / "t.csv"
    run(["gen", "--family", "random", "--seed", 4, "--size", "3x5", "-o", game])
    run(["run", "--game", game, "--steps", 600, "--trace-out", trace])
    capsys.readouterr()
    assert run(["bounds", "--certify", "--game", game, "--trace", trace]) == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True


def test_bounds_certify_rejects_wide_payoffs(tmp_path, g4_file):
    trace = tmp_path / "t.csv"
    run(["run", "--game", g4_file, "--steps", 50, "--trace-out", trace])
    assert run(["bounds", "--certify", "--game", g4_file, "--trace", trace]) == 2


def test_verify_quick(capsys):
    assert run(["verify", "--suite", "bounds", "--quick"]) == 0
    assert "OK" in capsys.readouterr().out


def test_verify_failure_exit_code(monkeypatch):
    from fplab import verify

    monkeypatch.setitem(verify.SUITES, "core", lambda quick: [("broken", "fail", "")])
    assert run(["verify", "--suite", "core"]) == 1


def test_sweep_index(tmp_path):
    out = tmp_path / "sw"
    assert run(["sweep", "--family", "gn", "--n-list", "4", "--k-list", "2,3", "--steps", 5000, "-o", out]) == 0
    index = json.loads((out / "index.json").read_text())
    assert [c["k"] for c in index["configs"]] == ["2", "3"]
    assert [c["t_star"] for c in index["configs"]] == [1513, 800]
    assert run(["sweep", "--family", "gn", "--n-list", "4", "--k-list", "1", "--steps", 10, "-o", out]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fplab", "bounds", "--epsilon-star", "--t", "4", "--n", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "1/2 (0.5)"
