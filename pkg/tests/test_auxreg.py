import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fexpand.auxreg import (
    BUILTIN_NAMES, AuxError, builtin, definition_residuals, jacobi_sn_quadratic, parse_aux_spec,
    rule_consistency,
)
from fexpand.symcore import Expr, Q, marker

PARAMS = {
    "gprime-over-g": {"alpha": 2, "beta": Q(3, 4)},
    "hprime-invh": {"lambda": 3, "mu": Q(-1, 2)},
    "riccati": {"alpha": 2, "beta": 5, "mu": Q(1, 3)},
    "jacobi-sn-cn-dn": {"k": Q(1, 2)},
}


def make(name):
    return builtin(name, PARAMS.get(name))


def d(aux, i=0, k=1):
    return Expr.atom(marker(aux.kernels[i], aux.var, k))


def test_all_nine_builtins_listed():
    assert len(BUILTIN_NAMES) == 9


def test_tanh_rule():
    aux = builtin("tanh")
    f = Expr.atom(aux.kernels[0])
    assert aux.arity == 1
    assert aux.first_derivative(0) == 1 - f ** 2


def test_jacobi_rules_and_identities():
    aux = make("jacobi-sn-cn-dn")
    sn, cn, dn = (Expr.atom(k) for k in aux.kernels)
    k2 = Q(1, 4)
    assert [aux.first_derivative(i) for i in range(3)] == [cn * dn, -(sn * dn), -k2 * sn * cn]
    rels = {idt.relation() for idt in aux.identities}
    assert rels == {sn ** 2 + cn ** 2 - 1, k2 * sn ** 2 + dn ** 2 - 1}


def test_gprime_over_g_rule():
    aux = builtin("gprime-over-g", {"alpha": 2, "beta": 3})
    f = Expr.atom(aux.kernels[0])
    assert aux.first_derivative(0) == 3 + 2 * f - f ** 2


@pytest.mark.parametrize("name", ["gprime-over-g", "hprime-invh"])
def test_derived_rules_match_linear_odes(name):
    assert all(r.is_zero() for r in definition_residuals(name, PARAMS[name]))


def test_second_derivative_of_tanh():
    aux = builtin("tanh")
    f = Expr.atom(aux.kernels[0])
    assert aux.reduce_marker(d(aux, k=2)) == -2 * f + 2 * f ** 3


def test_jacobi_marker_square():
    aux = make("jacobi-sn-cn-dn")
    sn = Expr.atom(aux.kernels[0])
    want = (1 - sn ** 2) * (1 - Q(1, 4) * sn ** 2)
    assert aux.reduce_marker(d(aux) ** 2) == want


def test_sinh_cosh_rule():
    aux = builtin("sinh-cosh")
    f = Expr.atom(aux.kernels[0])
    assert aux.reduce_marker(d(aux, 1)) == f


def test_quadratic_markers_kept_to_first_power():
    aux = jacobi_sn_quadratic(Q(1, 2))
    w = Expr.atom(aux.kernels[0])
    r = (1 - w ** 2) * (1 - Q(1, 4) * w ** 2)
    assert aux.reduce_marker(d(aux) ** 3) == r * d(aux)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_rule_consistency(name):
    assert all(r.is_zero() for r in rule_consistency(make(name)))


def test_quadratic_rule_consistency():
    assert all(r.is_zero() for r in rule_consistency(jacobi_sn_quadratic(Q(2, 3))))


def test_tanh_derivative_degrees():
    aux = builtin("tanh")
    for k in range(1, 7):
        e = aux.reduce_marker(d(aux, k=k))
        assert e.degree(aux.kernels[0]) == k + 1


def test_identity_multiples_canonicalize_to_zero():
    aux = make("jacobi-sn-cn-dn")
    sn, cn, dn = (Expr.atom(k) for k in aux.kernels)
    junk = sn ** 3 * dn - 2 * cn + Q(5, 7)
    assert aux.apply_identities(junk * (sn ** 2 + cn ** 2 - 1)).is_zero()


def test_errors():
    with pytest.raises(AuxError):
        builtin("nope")
    with pytest.raises(AuxError):
        builtin("jacobi-sn-cn-dn")
    with pytest.raises(AuxError):
        builtin("riccati", {"alpha": 0, "beta": 1, "mu": 1})


def test_parse_aux_spec():
    assert parse_aux_spec("jacobi-sn-cn-dn:k=1/2") == ("jacobi-sn-cn-dn", {"k": Q(1, 2)})
    with pytest.raises(AuxError):
        parse_aux_spec("jacobi-sn-cn-dn:k")


def _random_expr(aux, items):
    e = Expr()
    n = aux.arity
    for c, i, p, k in items:
        e = e + Expr.const(c) * Expr.atom(aux.kernels[i % n]) ** p * d(aux, i % n, k)
    return e


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["tanh", "sinh-cosh", "jacobi-sn-cn-dn", "riccati"]),
       st.lists(st.tuples(st.integers(-5, 5), st.integers(0, 2), st.integers(0, 3),
                          st.integers(1, 3)), max_size=4))
def test_reduce_marker_idempotent(name, items):
    aux = make(name)
    once = aux.reduce_marker(_random_expr(aux, items))
    assert aux.reduce_marker(once) == once
