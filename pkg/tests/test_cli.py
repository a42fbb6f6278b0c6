import json

import pytest

from cli_harness import GOLDEN, ROOT, load_cases, run_in_process, run_subprocess
from gmink.serialize import canonical_json

CASES = load_cases()


@pytest.mark.parametrize("case", CASES, ids=[c["name"] for c in CASES])
def test_golden(case):
    code, out, err = run_in_process(case["args"])
    assert code == case["exit"], err
    assert out == (GOLDEN / f"{case['name']}.out").read_bytes()
    if code == 3:
        assert "error" in err


def test_malformed_message_names_field():
    code, _, err = run_in_process(["solve", "tests/fixtures/malformed/missing_atoms.json"])
    assert code == 3 and "'atoms'" in err


def test_solve_square_branch_label():
    code, out, _ = run_in_process(["solve", "tests/fixtures/square_problem.json"])
    assert code == 0 and json.loads(out)["branch"] == "gamma>1/2"


def test_numeric_failure_still_writes_report():
    code, out, _ = run_in_process(["solve", "tests/fixtures/mass_too_large.json"])
    rep = json.loads(out)
    assert code == 2 and rep["error"] == "MassTooLarge"


def test_subprocess_stdin_and_determinism():
    body = (ROOT / "tests/fixtures/square_problem.json").read_bytes()
    a = run_subprocess(["solve", "-"], stdin=body)
    b = run_subprocess(["solve", "-"], stdin=body)
    assert a[0] == 0 and a[1] == b[1]
    assert a[1] == (GOLDEN / "solve_square.out").read_bytes()


def test_verify_bundled_ehrhard():
    code, out, _ = run_in_process(["verify", "--suite", "ehrhard"])
    rep = json.loads(out)
    assert code == 0 and rep["passed"] and rep["n_reports"] >= 100
    assert rep["min_slack"] >= -1e-8


def test_sweep_json_csv_consistent():
    _, js, _ = run_in_process(["sweep-rectangles", "tests/fixtures/sweep.json"])
    _, cs, _ = run_in_process(["sweep-rectangles", "tests/fixtures/sweep.json", "--format", "csv"])
    rep = json.loads(js)
    rows = [list(map(float, line.split(","))) for line in cs.decode().splitlines()[1:]]
    assert [r[0] for r in rows] == rep["a1"] and [r[2] for r in rows] == rep["mu2"]


def test_output_file(tmp_path):
    dest = tmp_path / "out.json"
    code, out, _ = run_in_process(["ball-roots", "--c", "0.05", "-o", str(dest)])
    assert code == 0 and out == b""
    assert dest.read_bytes() == (GOLDEN / "ball_roots.out").read_bytes()


def test_threads_env(monkeypatch):
    monkeypatch.setenv("GMINK_THREADS", "3")
    a = run_in_process(["verify", "tests/fixtures/verify_pairs.json"])
    monkeypatch.setenv("GMINK_THREADS", "1")
    b = run_in_process(["verify", "tests/fixtures/verify_pairs.json"])
    assert a[1] == b[1]
    monkeypatch.setenv("GMINK_THREADS", "many")
    assert run_in_process(["ball-roots", "--c", "0.05"])[0] == 3


def test_float_formatting():
    assert canonical_json({"x": 0.5, "y": 0.1 + 0.2}) == '{\n  "x": 0.5,\n  "y": 0.30000000000000004\n}\n'


def test_console_script_help():
    code, out, _ = run_subprocess(["--help"])
    assert code == 0 and b"solve-smooth" in out
