import random
from fractions import Fraction

import pytest
import sympy

from fexpand.ansatz import AnsatzInstance, AnsatzShape, build
from fexpand.auxreg import builtin
from fexpand.collect import (
    ResidualDecomposition, ansatz_derivatives, extract_system, substitute, system_for,
)
from fexpand.pdeparse import parse_expr, parse_pde
from fexpand.reduce import OdeSpec, WaveSub, reduce_pde
from fexpand.symcore import Deriv, Expr, Q, SymKind, differentiate, marker, sym, to_laurent

from conftest import BURGER_FISHER, FKDV, FKDV_PARAMS, KAWAHARA

TANH = builtin("tanh")
SINH_COSH = builtin("sinh-cosh")


def ode(text, params=()):
    return reduce_pde(parse_pde(text, params))


def test_constant_ansatz():
    o = ode(BURGER_FISHER)
    a0 = sym("a0", SymKind.ANSATZ_COEFF)
    inst = AnsatzInstance(AnsatzShape.single(0, 0), TANH, (a0,), Expr.atom(a0))
    r = substitute(o, inst)
    assert r.T == (0,)
    a = Expr.atom(a0)
    assert dict(r.form.terms) == {((0,), (0,)): a - a ** 2}


def test_burger_fisher_tanh_components():
    o = ode(BURGER_FISHER)
    r = substitute(o, build(AnsatzShape.single(1, 1), TANH))
    assert r.T == (3,)
    # v'' v' reach F^5 and F^7 over the pole F^-3: T*Q spans F^0 .. F^10
    assert sorted(ex[0] for ex, _ in r.form.terms) == list(range(11))
    assert all(mk == (0,) for _, mk in r.form.terms)


def test_riccati_micro_equation_vanishes():
    v, xi = sym("v", SymKind.DEPENDENT), TANH.var
    lhs = parse_expr("D[v,xi] + v^2 - 1", {"xi": xi}, dependent="v")
    o = OdeSpec(v, xi, lhs)
    f = TANH.kernels[0]
    inst = AnsatzInstance(AnsatzShape.single(0, 0), TANH, (), Expr.atom(f))
    r = substitute(o, inst)
    assert r.is_zero()
    assert len(extract_system(r, ())) == 0


def test_system_unknowns_and_params():
    o = ode(FKDV, FKDV_PARAMS)
    w = WaveSub.default(parse_pde(FKDV, FKDV_PARAMS).independents)
    s = system_for(o, build(AnsatzShape.single(2, 2), TANH), w.wave_params)
    assert len(s.unknowns) == 10 + 2
    assert sorted(p.name for p in s.params) == ["delta", "rho", "sigma"]


def test_equations_are_normalized():
    o = ode(BURGER_FISHER)
    s = system_for(o, build(AnsatzShape.single(1, 1), TANH), WaveSub.default(
        parse_pde(BURGER_FISHER).independents).wave_params)
    assert len(set(s.equations)) == len(s.equations)
    for e in s.equations:
        assert e.content() == 1
        assert e.leading()[1] > 0


def test_burger_fisher_system_contains_kink():
    # a0 = 1/2, a1 = 1/2, alpha = 5/8, beta = 1/4 (the travelling kink)
    o = ode(BURGER_FISHER)
    inst = build(AnsatzShape.single(1, 1), TANH)
    w = WaveSub.default(parse_pde(BURGER_FISHER).independents)
    s = system_for(o, inst, w.wave_params)
    point = {c: Expr() for c in inst.coeffs}
    point.update({sym("a0"): Expr.const(Q(1, 2)), sym("a1"): Expr.const(Q(1, 2)),
                  w.wave_params[0]: Expr.const(Q(5, 8)), w.wave_params[1]: Expr.const(Q(1, 4))})
    assert all(e.subs(point).is_zero() for e in s.equations)


def test_kawahara_system_admits_quartic_family():
    o = ode(KAWAHARA)
    inst = build(AnsatzShape.single(4, 4), TANH)
    alpha, beta = WaveSub.default(parse_pde(KAWAHARA).independents).wave_params
    s = system_for(o, inst, (alpha, beta))
    assert len(s.unknowns) == 18 + 2
    a0, b = Expr.atom(sym("a0")), Expr.atom(beta)
    point = {c: Expr() for c in inst.coeffs if c.name != "a0"}
    point[sym("a2")] = Expr.const(Q(-35, 169))
    point[sym("a4")] = Expr.const(Q(35, 338))
    point[alpha] = -3 * b * (338 * a0 - 23) / 169
    for e in s.equations:
        # reduce modulo beta^2 = 1/52
        rest = e.subs(point)
        out = Expr()
        for m, c in rest.terms.items():
            k = dict(m).get(beta.id, 0)
            mono = tuple((aid, x) for aid, x in m if aid != beta.id)
            out = out + Expr({mono: c}) * Expr.const(Q(1, 52)) ** (k // 2) * b ** (k % 2)
        assert out.is_zero()


def test_empty_decomposition_gives_empty_system():
    from fexpand.symcore import LaurentForm
    r = ResidualDecomposition(LaurentForm((), None, {}), (), TANH)
    assert len(extract_system(r, ())) == 0


# numeric cross-check against an independent sympy chain rule

def _oracle(o, inst, aux):
    """Callable (kernel values, unknown values) -> exact ODE lhs value."""
    names = [k.name for k in aux.kernels]
    ks = sympy.symbols(names)
    rules = [sympy.sympify(str(aux.first_derivative(i)).replace("^", "**"),
                           locals=dict(zip(names, ks)))
             for i in range(aux.arity)]
    order = max(o.order_of(Expr({m: c})) for m, c in o.lhs.terms.items())
    # D^n(kernel_i) as polynomials in the kernels, by the plain chain rule
    # (the marker block already carries one derivative, hence order + 1)
    dk = {}
    for i, k in enumerate(ks):
        p = k
        for n in range(1, order + 2):
            p = sympy.expand(sum(sympy.diff(p, kk) * r for kk, r in zip(ks, rules)))
            dk[marker(aux.kernels[i], aux.var, n)] = sympy.lambdify(ks, p)
    derivs = [inst.body]
    for _ in range(order):
        derivs.append(differentiate(derivs[-1], aux.var))

    def value(kvals, uvals):
        env = dict(uvals)
        env.update({k: Q(x) for k, x in zip(aux.kernels, kvals)})
        env.update({a: Q(Fraction(fn(*kvals))) for a, fn in dk.items()})
        vals = {s: env[s] for s in o.lhs.free_syms() if s in env}
        vals[o.dependent] = derivs[0].evaluate(env)
        for a in o.lhs.atoms():
            if isinstance(a, Deriv) and a.fn is o.dependent:
                vals[a] = derivs[a.total].evaluate(env)
        return o.lhs.evaluate(vals)

    return value


def _rand_q(rng, lo=-30, hi=30):
    return Q(rng.randint(lo, hi), rng.randint(1, 12))


CASES = [
    ("bf-tanh", BURGER_FISHER, (), "tanh", AnsatzShape.single(1, 1)),
    ("kawahara-tanh", KAWAHARA, (), "tanh", AnsatzShape.single(4, 4)),
    ("fkdv-tanh", FKDV, FKDV_PARAMS, "tanh", AnsatzShape.single(2, 2)),
    ("bf-sinh-cosh", BURGER_FISHER, (), "sinh-cosh", AnsatzShape.uniform(2, 1)),
]


@pytest.mark.parametrize("name,text,params,auxname,shape", CASES, ids=[c[0] for c in CASES])
def test_numeric_cross_check(name, text, params, auxname, shape):
    o = ode(text, params)
    aux = builtin(auxname)
    inst = build(shape, aux)
    r = substitute(o, inst)
    oracle = _oracle(o, inst, aux)
    rng = random.Random(name)
    wave = list(WaveSub.default(parse_pde(text, params).independents).wave_params)
    for _ in range(200):
        if aux.arity == 1:
            f = _rand_q(rng, -9, 9)
            kvals = (Fraction(int(f.numerator), int(f.denominator)),)
            if not kvals[0]:
                kvals = (Fraction(1, 3),)
        else:
            # rational point on G^2 - F^2 = 1
            t = Fraction(rng.choice([-1, 1]) * rng.randint(1, 40), rng.randint(1, 40))
            kvals = ((t * t - 1) / (2 * t), (t * t + 1) / (2 * t))
            if not kvals[0]:
                continue
        uvals = {c: _rand_q(rng) for c in inst.coeffs}
        uvals.update({s: _rand_q(rng) for s in wave + list(o.params)})
        want = oracle(kvals, uvals)
        got = r.evaluate([Q(x) for x in kvals], [], uvals)
        assert got == want


def test_identity_invariance():
    o = ode(BURGER_FISHER)
    inst = build(AnsatzShape.uniform(2, 1), SINH_COSH)
    derivs = ansatz_derivatives(inst, 2)
    table = {o.dependent: derivs[0]}
    for a in o.lhs.atoms():
        if isinstance(a, Deriv):
            table[a] = derivs[a.total]
    q = o.lhs.subs(table)
    f, g = (Expr.atom(k) for k in SINH_COSH.kernels)
    junk = (f ** 3 * Expr.atom(sym("a0")) - Q(2, 7) * g) * (f ** 2 - g ** 2 + 1)

    def system(e):
        canon, t = SINH_COSH.canonical(e)
        r = ResidualDecomposition(to_laurent(canon, SINH_COSH.kernels, SINH_COSH.var), t,
                                  SINH_COSH)
        return set(extract_system(r, inst.coeffs).equations)

    assert system(q + junk) == system(q)
