import pytest

from fexpand.pdeparse import (
    GrammarError, NonAutonomous, UnsupportedEquation, parse_expr, parse_pde, parse_relation,
    print_pde,
)
from fexpand.symcore import Expr, sym

from conftest import BURGER_FISHER, FKDV, FKDV_PARAMS, KAWAHARA


def test_burger_fisher():
    p = parse_pde(BURGER_FISHER)
    assert [s.name for s in p.independents] == ["t", "x"]
    assert p.dependent.name == "u"
    assert len(p.lhs) == 5
    assert print_pde(p) == "-u^2 + u*u_x + u + u_xx - u_t = 0"


def test_kawahara():
    p = parse_pde(KAWAHARA)
    assert len(p.lhs) == 4
    assert print_pde(p, "latex") == "6uu_x+u_t+u_{3x}-u_{5x}=0"


def test_fifth_order_family_with_params():
    p = parse_pde(FKDV, FKDV_PARAMS)
    assert sorted(s.name for s in p.params) == ["delta", "rho", "sigma"]
    assert len(p.lhs) == 5


@pytest.mark.parametrize("text", [BURGER_FISHER, KAWAHARA])
def test_print_round_trip(text):
    p = parse_pde(text)
    assert parse_pde(print_pde(p)).lhs == p.lhs


def test_bracket_derivative_notation():
    assert parse_pde("D[u,t] + D[u,x,x] = 0").lhs == parse_pde("u_t + u_xx = 0").lhs


def test_mixed_partials_commute():
    assert parse_pde("u_tx + u = 0").lhs == parse_pde("u_xt + u = 0").lhs


def test_explicit_coordinate_rejected():
    with pytest.raises(NonAutonomous):
        parse_pde("u_t + x*u_x = 0")


def test_non_polynomial_rejected():
    with pytest.raises(UnsupportedEquation):
        parse_pde("u_t + sin(u) = 0")


def test_syntax_error_reports_position():
    with pytest.raises(GrammarError) as err:
        parse_pde("u_t + * u = 0")
    assert "position 6" in str(err.value)


def test_undeclared_parameter():
    with pytest.raises(GrammarError):
        parse_pde("u_t + c*u_x = 0")
    assert [s.name for s in parse_pde("u_t + c*u_x = 0", ["c"]).params] == ["c"]


def test_rational_coefficients():
    p = parse_pde("u_t + 3/2*u*u_x = 0")
    assert sorted(str(c) for c in p.lhs.terms.values()) == ["1", "3/2"]


def test_relation():
    s = sym("s")
    head, n, rhs = parse_relation("s^2=13", {"s": s})
    assert (head, n, rhs) == (s, 2, Expr.const(13))


def test_kernel_calls_in_solution_mode():
    e = parse_expr("1/2 + tanh(t/2 + x)", {}, allow_kernels=True)
    assert len(e) == 2
