import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fexpand.pdeparse import parse_expr, parse_pde
from fexpand.reduce import SolvableByQuadrature, WaveSub, monomial_split, reduce_pde
from fexpand.symcore import Deriv, Expr, differentiate, sym

from conftest import BURGER_FISHER, FKDV, FKDV_PARAMS, KAWAHARA

ALPHA, BETA = sym("alpha"), sym("beta")
V, XI = sym("v"), sym("xi")


def ode(text, params=()):
    return reduce_pde(parse_pde(text, params))


def expr(text, params=()):
    table = {n: sym(n) for n in ("alpha", "beta") + tuple(params)}
    return parse_expr(text, table, dependent="v")


def test_burger_fisher_ode():
    o = ode(BURGER_FISHER)
    assert o.lhs == expr("beta^2*D[v,xi,xi] + beta*v*D[v,xi] - alpha*D[v,xi] + v - v^2")


def test_fifth_order_ode():
    o = ode(FKDV, FKDV_PARAMS)
    want = expr("alpha*D[v,xi] + beta^5*D[v,xi,xi,xi,xi,xi] + beta^3*rho*v*D[v,xi,xi,xi] "
                "+ beta*sigma*v^2*D[v,xi] + beta^3*delta*D[v,xi]*D[v,xi,xi]", FKDV_PARAMS)
    assert o.lhs == want


def test_kawahara_ode():
    o = ode(KAWAHARA)
    assert o.lhs == expr("alpha*D[v,xi] + 6*beta*v*D[v,xi] + beta^3*D[v,xi,xi,xi] - beta^5*D[v,xi,xi,xi,xi,xi]")


def test_linear_advection():
    assert ode("u_t + u_x = 0").lhs == expr("(alpha + beta)*D[v,xi]")


def test_monomial_split_burger_fisher():
    m = monomial_split(ode(BURGER_FISHER))
    assert m[0] == expr("beta^2*D[v,xi,xi]")
    assert m[1] == expr("beta*v*D[v,xi]")


def test_monomial_split_kawahara():
    m = monomial_split(ode(KAWAHARA))
    assert m[0] == expr("-beta^5*D[v,xi,xi,xi,xi,xi]")
    assert m[1] == expr("6*beta*v*D[v,xi]")


def test_single_monomial_is_quadrature():
    with pytest.raises(SolvableByQuadrature):
        monomial_split(ode("u_xx = 0"))


def test_wave_param_count_checked():
    p = parse_pde(BURGER_FISHER)
    with pytest.raises(ValueError):
        reduce_pde(p, WaveSub.default(p.independents[:1]))


# chain-rule soundness: u(t, x) = P(alpha t + beta x) agrees with the ODE at v = P

ATOMS = ["u", "u_t", "u_x", "u_xx", "u_tx", "u_xxx"]
pde_terms = st.lists(st.tuples(st.integers(-4, 4).filter(bool),
                               st.lists(st.sampled_from(ATOMS), min_size=1, max_size=3)),
                     min_size=1, max_size=4)


def _plug_pde(p, profile):
    t, x = p.independents
    phase = Expr.atom(ALPHA) * Expr.atom(t) + Expr.atom(BETA) * Expr.atom(x)
    u = profile.subs({XI: phase})
    table = {p.dependent: u}
    for a in p.lhs.atoms():
        if isinstance(a, Deriv):
            d = u
            for s, k in a.orders:
                for _ in range(k):
                    d = differentiate(d, s)
            table[a] = d
    return p.lhs.subs(table), phase


def _plug_ode(o, profile, phase):
    table = {o.dependent: profile}
    for a in o.lhs.atoms():
        if isinstance(a, Deriv):
            d = profile
            for _ in range(a.total):
                d = differentiate(d, XI)
            table[a] = d
    return o.lhs.subs(table).subs({XI: phase})


@settings(max_examples=40, deadline=None)
@given(pde_terms, st.lists(st.integers(-3, 3), min_size=1, max_size=4))
def test_chain_rule_soundness(terms, coeffs):
    text = " + ".join(f"({c})*" + "*".join(ms) for c, ms in terms) + " = 0"
    # the anchor term keeps both variables present and the equation nonzero
    p = parse_pde(text.replace(" = 0", " + 100*u_t*u_x = 0"))
    profile = sum((Expr.const(c) * Expr.atom(XI) ** i for i, c in enumerate(coeffs)), Expr())
    direct, phase = _plug_pde(p, profile)
    assert direct == _plug_ode(reduce_pde(p), profile, phase)
