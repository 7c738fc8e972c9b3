import io
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from tropmoment.cli import RunConfig, main

DATA = Path(__file__).parent / "data" / "genus2"


def run(argv, stdin=""):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, stdin=io.StringIO(stdin), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


BANANA3 = "u v 1\nu v 1\nu v 1\n"


def test_info_banana():
    code, out, err = run(["info", "--input", "-"], BANANA3)
    assert code == 0
    d = json.loads(out)
    assert d["graph"] == {"n": 2, "m": 3, "genus": 2, "total_length": 3}
    assert [e["foster"] for e in d["edges"]] == [pytest.approx(2 / 3)] * 3
    assert "wall time" in err


def test_info_segment_and_errors():
    code, out, _ = run(["info"], "a b 2\n")
    assert code == 0 and json.loads(out)["edges"][0]["foster"] == pytest.approx(0, abs=1e-15)
    code, out, err = run(["info"], "a b 1\nc d 1\n")
    assert code == 2 and out == "" and "ConnectivityError" in err
    code, _, err = run(["info"], "a b 1\nb c oops\n")
    assert code == 2 and "line 2, column 5" in err
    code, _, err = run(["info", "--input", "/does/not/exist"])
    assert code == 2


def test_moment_circle():
    code, out, _ = run(["moment"], "a b 6\nb a 6\n")
    assert code == 0
    assert json.loads(out)["moment"] == pytest.approx(1.0, rel=1e-12)


def test_moment_with_tree_oracle():
    code, out, _ = run(["moment", "--oracle", "trees"], BANANA3)
    d = json.loads(out)
    assert code == 0
    assert d["moment"] == pytest.approx(10 / 36)
    assert d["oracles"]["trees"]["value"] == pytest.approx(10 / 36)
    assert abs(d["oracles"]["trees"]["delta"]) < 1e-9


def test_moment_with_all_oracles():
    code, out, _ = run(["moment", "--oracle", "all", "--samples", "200000", "--seed", "4"], BANANA3)
    d = json.loads(out)
    assert code == 0
    mc = d["oracles"]["montecarlo"]
    assert list(mc) == ["estimate", "stderr", "samples", "seed", "delta", "ok"]
    assert mc["seed"] == 4 and mc["samples"] == 200000


def test_check_failure_exit_code(monkeypatch):
    import tropmoment.cli as cli

    monkeypatch.setattr(cli, "moment_by_trees", lambda *a: 0.5)
    code, out, _ = run(["moment", "--oracle", "trees"], BANANA3)
    d = json.loads(out)
    assert code == 3
    assert d["oracles"]["trees"]["ok"] is False
    assert d["oracles"]["trees"]["delta"] == pytest.approx(0.5 - 10 / 36)


def test_cap_exit_code():
    text = "".join(f"u v {i + 1}\n" for i in range(12))
    code, out, err = run(["moment", "--oracle", "trees", "--cap", "5"], text)
    assert code == 4 and out == ""
    assert "spanning trees: 12" in err


def test_tau_and_identity():
    code, out, _ = run(["tau"], "a b 8\n")
    assert code == 0 and json.loads(out)["tau"] == pytest.approx(2.0)
    code, out, _ = run(["identity"], "a b 8\n")
    d = json.loads(out)
    assert code == 0
    assert d["lhs"] == pytest.approx(1.0) and d["rhs"] == pytest.approx(1.0)
    code, out, _ = run(["identity"], "a b 6\nb a 6\n")
    d = json.loads(out)
    assert d["tau"] == pytest.approx(1.0) and abs(d["identity_residual"]) < 1e-12


def test_identity_random_graph():
    import numpy as np

    from tropmoment.corpus import random_graph

    g = random_graph(30, 21, np.random.default_rng(50))
    assert g.m == 50
    code, out, _ = run(["identity"], g.to_text())
    assert code == 0 and abs(json.loads(out)["identity_residual"]) < 1e-9


def test_base_vertex_flag():
    code, out, _ = run(["moment", "--base-vertex", "v"], BANANA3)
    assert code == 0 and json.loads(out)["base_vertex"] == "v"
    code, _, err = run(["moment", "--base-vertex", "zz"], BANANA3)
    assert code == 2


@pytest.mark.parametrize(
    "flags", [["--tolerance", "0"], ["--samples", "0"], ["--cap", "0"], ["--radius", "0"], ["--seed", "-1"], ["--format", "xml"]]
)
def test_invalid_flags(flags):
    assert run(["moment", *flags], BANANA3)[0] == 2


def test_table_format():
    code, out, _ = run(["info", "--format", "table"], BANANA3)
    assert code == 0
    assert "graph.genus" in out and "foster" in out


def test_json_is_byte_identical():
    argv = ["moment", "--oracle", "all", "--samples", "20000", "--seed", "9"]
    assert run(argv, BANANA3)[1] == run(argv, BANANA3)[1]


def test_batch_genus2_shapes():
    code, out, _ = run(["batch", str(DATA)])
    assert code == 0
    lines = [json.loads(x) for x in out.splitlines()]
    by_name = {d["file"]: d for d in lines}
    assert len(lines) == 6
    assert all(d["status"] == "ok" for d in lines)
    x = (1, 2, 3)
    three_edge = (sum(x) + 6 / 11) / 12
    assert by_name["banana.txt"]["report"]["moment"] == pytest.approx(three_edge, rel=1e-12)
    assert by_name["dumbbell.txt"]["report"]["moment"] == pytest.approx(10 / 12, rel=1e-12)
    assert by_name["circle_bridge.txt"]["report"]["moment"] == pytest.approx(4 / 12, rel=1e-12)
    assert by_name["segment.txt"]["report"]["moment"] == 0


def test_batch_empty_and_corrupt(tmp_path):
    assert run(["batch", str(tmp_path)]) == (0, "", run(["batch", str(tmp_path)])[2])
    shutil.copy(DATA / "banana.txt", tmp_path / "a.txt")
    (tmp_path / "b.txt").write_text("a a 1\n")
    code, out, _ = run(["batch", str(tmp_path)])
    lines = [json.loads(x) for x in out.splitlines()]
    assert code == 2
    assert [d["status"] for d in lines] == ["ok", "error"]
    assert "LoopEdgeError" in lines[1]["error"]
    assert run(["batch", str(tmp_path / "missing")])[0] == 2


def test_batch_check_failure_wins(tmp_path, monkeypatch):
    import tropmoment.cli as cli

    shutil.copy(DATA / "banana.txt", tmp_path / "a.txt")
    (tmp_path / "b.txt").write_text("a b\n")
    monkeypatch.setattr(cli, "moment_by_trees", lambda *a: 0.0)
    code, out, _ = run(["batch", str(tmp_path), "--oracle", "trees"])
    assert code == 3
    assert [json.loads(x)["status"] for x in out.splitlines()] == ["check_failed", "error"]


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(tolerance=float("nan"))
    assert RunConfig().seed == 0


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tropmoment", "moment"], input="a b 6\nb a 6\n", capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["moment"] == pytest.approx(1.0)


def test_large_graph_smoke():
    import numpy as np

    from tropmoment.corpus import random_graph

    g = random_graph(1000, 500, np.random.default_rng(1))
    code, out, err = run(["moment"], g.to_text())
    assert code == 0 and "wall time" in err
