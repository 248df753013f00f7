"""End-to-end tests for the command-line front end.

Each subcommand is exercised through click's test runner (and once through
a real subprocess) against tiny circuits whose factorizations are known in
closed form; exit codes follow the documented table (0 ok, 1 input error,
2 verification failure, 3 reducible, 4 infeasible).
"""

import json
import subprocess
import sys
from fractions import Fraction

import pytest
from click.testing import CliRunner

from circfactor.circuit_ir import dense_from_circuit, parse_circuit
from circfactor.cli import main
from circfactor.polyring import parse_poly

DIFF_OF_SQUARES = """\
input x1
input x2
node a = mul x1 x1
node b = mul x2 x2
node nb = mul b c(-1)
node g = add a nb
output g
"""

SUM_OF_SQUARES_PLUS_ONE = """\
input x1
input x2
node a = mul x1 x1
node b = mul x2 x2
node s = add a b
node g = add s c(1)
output g
"""

PERFECT_SQUARE = """\
input x1
node a = add x1 c(1)
node g = mul a a
output g
"""

CONSTANT = """\
node g = c(7)
output g
"""

ZERO_DIFFERENCE = """\
input x1
node nx = mul x1 c(-1)
node g = add x1 nx
output g
"""

PRODUCT_PLUS_ONE = """\
input x1
input x2
node p = mul x1 x2
node g = add p c(1)
output g
"""


@pytest.fixture()
def runner():
    return CliRunner()


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# ---------- factor ----------


def test_factor_difference_of_squares(runner, tmp_path):
    path = _write(tmp_path, "c.circ", DIFF_OF_SQUARES)
    res = runner.invoke(main, ["factor", path])
    assert res.exit_code == 0, res.output
    data = json.loads(res.output)
    assert data["schema"] == 1
    assert Fraction(data["unit"]) == 1
    assert len(data["factors"]) == 2
    assert all(f["multiplicity"] == 1 for f in data["factors"])
    product = parse_poly("1")
    for f in data["factors"]:
        product = product * dense_from_circuit(parse_circuit(f["circuit"]))
    assert product == parse_poly("x1^2 - x2^2")


def test_factor_malformed_file_exits_1(runner, tmp_path):
    path = _write(tmp_path, "bad.circ", "input x1\nnode g = frobnicate x1\noutput g\n")
    res = runner.invoke(main, ["factor", path])
    assert res.exit_code == 1
    assert "line" in res.stderr.lower() or "CircuitSyntaxError" in res.stderr


def test_factor_missing_file_exits_1(runner, tmp_path):
    res = runner.invoke(main, ["factor", str(tmp_path / "absent.circ")])
    assert res.exit_code == 1


def test_factor_constant_circuit(runner, tmp_path):
    path = _write(tmp_path, "const.circ", CONSTANT)
    res = runner.invoke(main, ["factor", path])
    assert res.exit_code == 0, res.output
    data = json.loads(res.output)
    assert data["factors"] == []
    assert Fraction(data["unit"]) == 7


def test_factor_perfect_square_multiplicity(runner, tmp_path):
    path = _write(tmp_path, "sq.circ", PERFECT_SQUARE)
    res = runner.invoke(main, ["factor", path])
    assert res.exit_code == 0, res.output
    data = json.loads(res.output)
    assert len(data["factors"]) == 1
    assert data["factors"][0]["multiplicity"] == 2
    got = dense_from_circuit(parse_circuit(data["factors"][0]["circuit"]))
    assert got == parse_poly("x1 + 1")


def test_factor_deterministic_output(runner, tmp_path):
    path = _write(tmp_path, "c.circ", DIFF_OF_SQUARES)
    first = runner.invoke(main, ["factor", path])
    second = runner.invoke(main, ["factor", path])
    assert first.exit_code == second.exit_code == 0
    assert first.output == second.output


def test_factor_out_flag_writes_file(runner, tmp_path):
    path = _write(tmp_path, "c.circ", DIFF_OF_SQUARES)
    target = tmp_path / "result.json"
    res = runner.invoke(main, ["factor", path, "--out", str(target)])
    assert res.exit_code == 0
    assert res.output == ""
    data = json.loads(target.read_text())
    assert data["schema"] == 1


def test_factor_epsilon_validation(runner, tmp_path):
    path = _write(tmp_path, "c.circ", DIFF_OF_SQUARES)
    for bad in ["2/3", "0", "1/2", "abc", "-1/3"]:
        res = runner.invoke(main, ["factor", path, "--epsilon", bad])
        assert res.exit_code == 1, bad


def test_factor_unknown_family_rejected(runner, tmp_path):
    path = _write(tmp_path, "c.circ", DIFF_OF_SQUARES)
    res = runner.invoke(main, ["factor", path, "--hard-family", "nonesuch"])
    assert res.exit_code == 1


def test_factor_subprocess_byte_identical(tmp_path):
    path = _write(tmp_path, "c.circ", DIFF_OF_SQUARES)
    cmd = [sys.executable, "-m", "circfactor.cli", "factor", path]
    one = subprocess.run(cmd, capture_output=True, check=True)
    two = subprocess.run(cmd, capture_output=True, check=True)
    assert one.stdout == two.stdout
    assert json.loads(one.stdout)["schema"] == 1


# ---------- irreducible ----------


@pytest.mark.parametrize("method", ["pipeline", "certificate"])
def test_irreducible_verdict(runner, tmp_path, method):
    path = _write(tmp_path, "irr.circ", SUM_OF_SQUARES_PLUS_ONE)
    res = runner.invoke(main, ["irreducible", path, "--method", method])
    assert res.exit_code == 0, res.output
    assert res.output.strip() == "irreducible"


@pytest.mark.parametrize("method", ["pipeline", "certificate"])
def test_reducible_verdict_exit_3(runner, tmp_path, method):
    path = _write(tmp_path, "red.circ", DIFF_OF_SQUARES)
    res = runner.invoke(main, ["irreducible", path, "--method", method])
    assert res.exit_code == 3
    assert res.output.strip() == "reducible"


def test_irreducible_square_is_reducible(runner, tmp_path):
    path = _write(tmp_path, "sq.circ", PERFECT_SQUARE)
    res = runner.invoke(main, ["irreducible", path])
    assert res.exit_code == 3
    assert res.output.strip() == "reducible"


def test_irreducible_require_squarefree_rejects(runner, tmp_path):
    path = _write(tmp_path, "sq.circ", PERFECT_SQUARE)
    res = runner.invoke(main, ["irreducible", path, "--require-squarefree"])
    assert res.exit_code == 1


def test_irreducible_constant_is_input_error(runner, tmp_path):
    path = _write(tmp_path, "const.circ", CONSTANT)
    res = runner.invoke(main, ["irreducible", path])
    assert res.exit_code == 1


# ---------- pit ----------


def test_pit_zero(runner, tmp_path):
    path = _write(tmp_path, "zero.circ", ZERO_DIFFERENCE)
    res = runner.invoke(main, ["pit", path])
    assert res.exit_code == 0, res.output
    assert res.output.strip() == "zero"


def test_pit_nonzero_witness_reevaluates(runner, tmp_path):
    path = _write(tmp_path, "nz.circ", PRODUCT_PLUS_ONE)
    res = runner.invoke(main, ["pit", path])
    assert res.exit_code == 0, res.output
    line = res.output.strip()
    assert line.startswith("nonzero")
    point = {}
    for chunk in line.split()[1:]:
        var, _, val = chunk.partition("=")
        point[var] = Fraction(val)
    assert parse_poly("x1*x2 + 1").evaluate(point) != 0


def test_pit_cap_exceeded_exit_4(runner, tmp_path):
    path = _write(tmp_path, "nz.circ", PRODUCT_PLUS_ONE)
    res = runner.invoke(main, ["pit", path, "--grid-cap", "1"])
    assert res.exit_code == 4


# ---------- verify ----------


def _factored_pair(runner, tmp_path, circuit_text=DIFF_OF_SQUARES):
    circ_path = _write(tmp_path, "c.circ", circuit_text)
    result_path = tmp_path / "result.json"
    res = runner.invoke(main, ["factor", circ_path, "--out", str(result_path)])
    assert res.exit_code == 0
    return circ_path, result_path


def test_verify_accepts_matching_pair(runner, tmp_path):
    circ_path, result_path = _factored_pair(runner, tmp_path)
    res = runner.invoke(main, ["verify", circ_path, str(result_path)])
    assert res.exit_code == 0, res.output


def test_verify_rejects_tampered_multiplicity(runner, tmp_path):
    circ_path, result_path = _factored_pair(runner, tmp_path)
    data = json.loads(result_path.read_text())
    data["factors"][0]["multiplicity"] = 2
    result_path.write_text(json.dumps(data))
    res = runner.invoke(main, ["verify", circ_path, str(result_path)])
    assert res.exit_code == 2


def test_verify_rejects_missing_factor(runner, tmp_path):
    circ_path, result_path = _factored_pair(runner, tmp_path)
    data = json.loads(result_path.read_text())
    data["factors"] = data["factors"][:1]
    result_path.write_text(json.dumps(data))
    res = runner.invoke(main, ["verify", circ_path, str(result_path)])
    assert res.exit_code == 2


def test_verify_rejects_bad_json(runner, tmp_path):
    circ_path, result_path = _factored_pair(runner, tmp_path)
    result_path.write_text("{not json")
    res = runner.invoke(main, ["verify", circ_path, str(result_path)])
    assert res.exit_code == 1


def test_verify_rejects_wrong_schema(runner, tmp_path):
    circ_path, result_path = _factored_pair(runner, tmp_path)
    data = json.loads(result_path.read_text())
    data["schema"] = 2
    result_path.write_text(json.dumps(data))
    res = runner.invoke(main, ["verify", circ_path, str(result_path)])
    assert res.exit_code == 1


# ---------- environment override ----------


def test_seed_family_env_override_smoke(runner, tmp_path):
    path = _write(tmp_path, "c.circ", DIFF_OF_SQUARES)
    res = runner.invoke(
        main, ["factor", path, "--hard-family", "esym"],
        env={"CIRCFACTOR_SEED_FAMILY": "nw"},
    )
    assert res.exit_code == 0, res.output
    data = json.loads(res.output)
    assert len(data["factors"]) == 2
