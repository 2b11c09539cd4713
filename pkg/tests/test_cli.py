import json

import pytest

from fexpand.cli import EXIT_BUDGET, EXIT_INPUT, EXIT_OK, EXIT_VERIFY, main, parse_orders
from fexpand.ansatz import AnsatzShape
from fexpand.pdeparse import InputError, parse_pde
from fexpand.verify import bundled_corpus, parse_solution, verify_solution

from conftest import BURGER_FISHER, fkdv_member


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_reduce_burger_fisher(capsys):
    code, out, _ = run(capsys, "reduce", BURGER_FISHER)
    assert code == EXIT_OK
    assert out.strip() == "beta^2*D[v,xi,xi] + beta*v*D[v,xi] - alpha*D[v,xi] - v^2 + v = 0"


def test_reduce_advection(capsys):
    code, out, _ = run(capsys, "reduce", "u_t + u_x = 0", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["schema_version"] == 1
    assert doc["ode"] == "alpha*D[v,xi] + beta*D[v,xi] = 0"


def test_malformed_input(capsys):
    code, _, err = run(capsys, "reduce", "u_t + * u = 0")
    assert code == EXIT_INPUT
    assert "position 6" in err


def test_unknown_flag(capsys):
    assert run(capsys, "reduce", "u_t = 0", "--bogus")[0] == EXIT_INPUT


def test_balance(capsys):
    code, out, _ = run(capsys, "balance", BURGER_FISHER, "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["orders"] == {"a": [1], "b": [1]}


def test_solve_ito_static_kink(capsys):
    code, out, _ = run(capsys, "solve", fkdv_member("ito"), "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["complete"]
    want = parse_solution("4*beta^2 - 6*beta^2*tanh(beta*x)^2", ["beta"]).expression
    sols = [parse_solution(f["solution"], f["params"]).expression
            for f in doc["families"] if f["solution"]]
    assert want in sols


def test_solve_latex(capsys):
    code, out, _ = run(capsys, "solve", BURGER_FISHER, "--format", "latex")
    assert code == EXIT_OK
    assert "\\tanh" in out


def test_solve_budget_exhausted(capsys):
    code, out, _ = run(capsys, "solve", BURGER_FISHER, "--max-branches", "2",
                       "--format", "json")
    assert code == EXIT_BUDGET
    assert json.loads(out)["complete"] is False


def test_solve_orders_override(capsys):
    code, out, _ = run(capsys, "solve", BURGER_FISHER, "--orders", "0,1", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["orders"] == {"a": [0], "b": [1]}


def test_parse_orders():
    assert parse_orders("2", 1) == AnsatzShape.single(2, 2)
    assert parse_orders("1,2", 1) == AnsatzShape.single(1, 2)
    assert parse_orders("1,1;1,0;0,1;0,0", 2).orders == ((1, 1), (1, 0), (0, 1), (0, 0))
    with pytest.raises(InputError):
        parse_orders("x", 1)


def _write(tmp_path, fixtures):
    path = tmp_path / "fixtures.json"
    path.write_text(json.dumps({"fixtures": [f.to_json() for f in fixtures]}))
    return str(path)


def test_verify_single_fixture(capsys, tmp_path):
    fx = [f for f in bundled_corpus() if f.id == "ito-u2"]
    code, out, _ = run(capsys, "verify", "--fixtures", _write(tmp_path, fx), "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["total"] == 1 and doc["zero"] == 1


def test_verify_failure_exit(capsys, tmp_path):
    import dataclasses
    (fx,) = [f for f in bundled_corpus() if f.id == "ito-u2"]
    bad = dataclasses.replace(fx, id="bad", solution="tanh(x)")
    code, _, _ = run(capsys, "verify", "--fixtures", _write(tmp_path, [bad]))
    assert code == EXIT_VERIFY


def test_verify_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "verify", "--fixtures", str(tmp_path / "nope.json"))
    assert code == EXIT_INPUT
    assert "not found" in err


def test_corpus_listing(capsys):
    code, out, _ = run(capsys, "corpus", "--format", "json")
    assert code == EXIT_OK
    assert len(json.loads(out)["fixtures"]) == len(bundled_corpus())


@pytest.mark.parametrize("equation", [BURGER_FISHER, fkdv_member("sk")])
def test_json_solutions_round_trip(capsys, equation):
    # every emitted solution string parses back and verifies
    code, out, _ = run(capsys, "solve", equation, "--format", "json")
    assert code == EXIT_OK
    p = parse_pde(equation)
    doc = json.loads(out)
    assert doc["families"]
    for fam in doc["families"]:
        if fam["solution"] is None:
            continue
        sol = parse_solution(fam["solution"], fam["params"])
        assert verify_solution(sol, p, samples=0).is_zero
