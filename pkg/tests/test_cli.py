import io
import json
import subprocess
import sys

import pytest

from hoderiv.cli import run


def cli(*args, env=None):
    proc = subprocess.run(
        [sys.executable, "-m", "hoderiv", *args],
        capture_output=True, text=True, env=env, timeout=300,
    )
    return proc.returncode, proc.stdout, proc.stderr


def test_solve_two_unknowns():
    code, out, _ = cli("solve", "f(x^3) + x^2*g(x) = 0", "--normalized")
    assert code == 0
    assert out.splitlines() == ["3*f = D1", "g = -D1"]


def test_solve_with_constants():
    code, out, _ = cli("solve", "f(x^3) + x^2*g(x) = 0")
    assert out.splitlines() == ["3*f = 3*f(1)*x + D1", "g = g(1)*x - D1", "f(1) + g(1) = 0"]


def test_solve_trivial():
    code, out, _ = cli("solve", "f(x^3)+x*f(x^2)-2*x^2*f(x)=0")
    assert (code, out) == (0, "f = f(1)*x\n")


def test_solve_json_is_stable():
    args = ("solve", "f(x^5) + x*g(x^4) + x^4*h(x) = 0", "--normalized", "--format", "json")
    first = cli(*args)
    second = cli(*args)
    assert first == second
    obj = json.loads(first[1])
    assert [f["denominatorCleared"] for f in obj["functions"]] == [
        "15*f = 2*D1 + 9*D2", "3*g = -D1 - 3*D2", "3*h = 2*D1 + 3*D2",
    ]
    assert obj["functions"][0]["terms"] == [{"basis": "D1", "coeff": "2/15"}, {"basis": "D2", "coeff": "3/5"}]
    assert obj["status"] == "unique" and obj["constraints"] == []


@pytest.mark.parametrize("method", ["direct", "descending"])
def test_solve_methods(method):
    code, out, _ = cli("solve", "f(x^2) + x*g(x) = 0", "--normalized", "--method", method)
    assert code == 0 and out.splitlines() == ["f = D1", "g = -2*D1"]


def test_basis_table():
    code, out, _ = cli("basis", "4")
    assert code == 0
    assert out.splitlines() == [
        "f5 = D4",
        "f4 = -5*D4 - D3",
        "f3 = 10*D4 + 4*D3 + D2",
        "f2 = -10*D4 - 6*D3 - 3*D2 - D1",
        "f1 = 5*D4 + 4*D3 + 3*D2 + 2*D1 + D0",
    ]


def test_parse_error_exit_code():
    code, out, err = cli("solve", "f(x")
    assert code == 2 and out == ""
    assert "offset 3" in err and "^" in err


def test_usage_error():
    code, _, err = cli("basis")
    assert code == 2 and "usage" in err


def test_verify_pass_and_fail():
    eq = "f(x^5) + x*g(x^4) + x^4*h(x) = 0"
    assert cli("verify", eq, "--normalized", "--assign", "D1=d1", "D2=d1.d1")[0] == 0
    code, out, _ = cli("verify", eq, "--normalized", "--assign", "f=d1", "g=d1", "h=d1")
    assert code == 1 and out.startswith("fail: degree 5 block")


def test_verify_rejects_operator_of_wrong_order():
    code, _, err = cli("verify", "f(x^3) + x^2*g(x) = 0", "--normalized", "--assign", "D1=d1.d1")
    assert code == 2 and "order 1" in err


def test_verify_x_parts():
    eq = "f(x^3) + x^2*g(x) = 0"
    assert cli("verify", eq, "--assign", "f(1)=2", "g(1)=-2", "D1=d1")[0] == 0
    assert cli("verify", eq, "--assign", "f(1)=2", "g(1)=2")[0] == 1


def test_spectral_displays():
    code, out, _ = cli("spectral", "3")
    assert out.splitlines() == ["M =", "1/4 *", "[  1  -2   0   0 ]", "[  0   2  -3   0 ]", "[  0   0   3  -4 ]", "[  0   0   0   4 ]"]
    code, out, _ = cli("spectral", "3", "--limit", "--format", "json")
    assert [row[-1] for row in json.loads(out)["matrix"]] == ["-4", "6", "-4", "1"]
    code, out, _ = cli("spectral", "3", "--power", "10", "--format", "json")
    assert json.loads(out)["matrix"][0][0] == "1/1048576"


def test_spectral_descend():
    code, out, _ = cli("spectral", "3", "--descend", "f(x^4) + x*g(x^3) + x^2*h(x^2) + x^3*k(x) = 0")
    lines = out.splitlines()
    assert code == 0
    assert lines[:4] == ["level 3: F4 = D3", "  F~1 = F1 + 4*F4", "  F~2 = F2 - 6*F4", "  F~3 = F3 + 4*F4"]
    assert lines[-4:] == ["f = D3", "g = -D2 - 4*D3", "h = D1 + 3*D2 + 6*D3", "k = -2*D1 - 3*D2 - 4*D3"]


def test_spectral_descend_degree_mismatch():
    assert cli("spectral", "2", "--descend", "f(x^4) + x*g(x^3) + x^2*h(x^2) + x^3*k(x) = 0")[0] == 2


def test_polarize():
    code, out, _ = cli("polarize", "--n", "2", "--bound", "3")
    assert code == 0 and out.splitlines() == ["mixed: ok", "diagonal: ok", "vanishing: ok"]


def test_analyze():
    code, out, _ = cli("analyze", "-2,1,1", "--bound", "3")
    assert code == 0
    assert "max_order: 0" in out and "sum_weighted: 3" in out and "status: trivial-only" in out
    code, out, _ = cli("analyze", "5 -10 10 -5 1", "--bound", "3", "--format", "json")
    obj = json.loads(out)
    assert obj["maxOrder"] == 4 and obj["binomialProportional"] and obj["powersSolving"] == [1, 2, 3, 4]


def test_analyze_rejects_zero_vector():
    assert cli("analyze", "0,0")[0] == 2


def test_file_input(tmp_path):
    path = tmp_path / "eq.txt"
    path.write_text("f(x^2)\n - 2*x*f(x) = 0\n", encoding="utf-8")
    code, out, _ = cli("solve", "--file", str(path), "--normalized")
    assert (code, out) == (0, "f = D1\n")


def test_bound_from_environment():
    import os

    env = dict(os.environ, HODERIV_BOUND="0")
    assert cli("solve", "f(x) = 0", env=env)[0] == 2
    env["HODERIV_BOUND"] = "2"
    assert cli("verify", "f(x^2) - 2*x*f(x) = 0", "--assign", "D1=d1", env=env)[1] == "pass (bound 2)\n"


def test_run_in_process():
    out, err = io.StringIO(), io.StringIO()
    assert run(["solve", "f(x^2) - 2*x*f(x) = 0", "--normalized"], out, err) == 0
    assert out.getvalue() == "f = D1\n"
    assert run(["solve", "f(x) = "], out, err) == 2
