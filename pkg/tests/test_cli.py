import json

import pytest

from oimlab.cli import main
from oimlab.fixed_points import FixedPointCatalog

PAIR = "2 1\n1 2 -1\n"  # W_01 = +1
TRIANGLE = "3 3\n1 2 1\n1 3 1\n2 3 1\n"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_info_pair(capsys, write_graph):
    code, out, _ = run(capsys, "info", write_graph(PAIR))
    assert code == 0
    assert out.splitlines()[0] == "n=2 m=1"


def test_info_no_edges(capsys, write_graph):
    code, out, _ = run(capsys, "info", write_graph("3 0\n"))
    assert code == 0
    assert out.splitlines()[0] == "n=3 m=0"


def test_info_malformed(capsys, write_graph):
    code, _, err = run(capsys, "info", write_graph("2 1\n1 x 1\n"))
    assert code == 2
    assert "line 2" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "info", tmp_path / "absent.txt")
    assert code == 2
    assert err


def test_analyze_json(capsys, write_graph):
    code, out, _ = run(capsys, "analyze", write_graph(PAIR), "--k", 1, "--ks", 1)
    assert code == 0
    doc = json.loads(out)
    assert len(doc["records"]) == 4
    assert all(r["agree"] for r in doc["records"])
    assert doc["metadata"]["run_config"]["ks"] == 1.0


def test_analyze_csv(capsys, write_graph):
    code, out, _ = run(capsys, "analyze", write_graph(PAIR), "--format", "csv")
    assert code == 0
    assert len(out.strip().splitlines()) == 1 + 4


def test_analyze_roundtrip(capsys, write_graph, tmp_path):
    dest = tmp_path / "cat.json"
    code, _, _ = run(capsys, "analyze", write_graph(PAIR), "-o", dest)
    assert code == 0
    text = dest.read_text()
    back = FixedPointCatalog.from_json(text)
    assert json.loads(back.to_json())["records"] == json.loads(text)["records"]


def test_analyze_guard(capsys, write_graph):
    code, _, err = run(capsys, "analyze", write_graph("25 1\n1 2 1\n"))
    assert code == 2
    assert "solve" in err


def test_sweep_rows(capsys, write_graph):
    code, out, _ = run(capsys, "sweep", write_graph(PAIR), "--ratios", "0.5,1,2",
                       "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 13
    ratio2 = [l for l in lines[1:] if l.startswith("2,") and ",+-," in l]
    assert ratio2 and ratio2[0].split(",")[5] == "AttractiveMinimum"


def test_sweep_requires_ratios(capsys, write_graph):
    with pytest.raises(SystemExit) as info:
        main(["sweep", write_graph(PAIR)])
    assert info.value.code == 2


def test_solve_pair(capsys, write_graph):
    code, out, _ = run(capsys, "solve", write_graph(PAIR), "--seed", 7, "--ks", 0.5)
    assert code == 0
    doc = json.loads(out)
    assert doc["ising_energy"] == -1.0
    # W = +1 wants aligned spins, so the cut of the E = -1 edge is zero
    assert doc["cut_value"] == 0.0


def test_solve_maxcut_pair(capsys, write_graph):
    code, out, _ = run(capsys, "solve", write_graph("2 1\n1 2 1\n"), "--seed", 7, "--ks", 0.5)
    doc = json.loads(out)
    assert code == 0
    assert doc["ising_energy"] == -1.0
    assert doc["cut_value"] == 1.0


def test_solve_triangle_cut(capsys, write_graph):
    code, out, _ = run(capsys, "solve", write_graph(TRIANGLE), "--ks", 0.5)
    assert code == 0
    assert json.loads(out)["cut_value"] == 2.0


def test_solve_zero_starts(write_graph):
    with pytest.raises(SystemExit) as info:
        main(["solve", write_graph(PAIR), "--starts", "0"])
    assert info.value.code == 2


def test_verify_passes(capsys, write_graph):
    code, out, _ = run(capsys, "verify", write_graph(TRIANGLE), "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 5
    assert all(l.startswith("PASS") for l in lines)


def test_verify_alpha(capsys, write_graph):
    code, out, _ = run(capsys, "verify", write_graph(TRIANGLE), "--alpha", 0.25)
    assert code == 0
    assert all(c["passed"] for c in json.loads(out)["checks"])


def test_verify_asymmetrized(capsys, write_graph):
    code, out, _ = run(capsys, "verify", write_graph(TRIANGLE), "--debug-asymmetrize", 0.1,
                       "--format", "csv")
    assert code == 1
    assert "FAIL jacobian-hessian-identity" in out


def test_simulate_csv(capsys, write_graph, tmp_path):
    dest = tmp_path / "traj.csv"
    code, _, _ = run(capsys, "simulate-trajectory", write_graph(PAIR), "--init", "0.3,2.0",
                     "--format", "csv", "-o", dest)
    assert code == 0
    lines = dest.read_text().splitlines()
    assert lines[0] == "t,theta_0,theta_1,energy"
    assert lines[1].startswith("0,0.29999999999999999,2,")


def test_simulate_json_deterministic(capsys, write_graph):
    path = write_graph(PAIR)
    _, a, _ = run(capsys, "simulate-trajectory", path, "--seed", 4, "--tmax", 5)
    _, b, _ = run(capsys, "simulate-trajectory", path, "--seed", 4, "--tmax", 5)
    assert a == b
    assert json.loads(a)["metadata"]["run_config"]["seed"] == 4


def test_simulate_bad_init(write_graph):
    with pytest.raises(SystemExit) as info:
        main(["simulate-trajectory", write_graph(PAIR), "--init", "0.1"])
    assert info.value.code == 2
