"""Travelling-wave reduction u(x1..xn) = v(xi), xi = sum alpha_i x_i."""

from __future__ import annotations

from dataclasses import dataclass

from .pdeparse import PdeSpec
from .printing import to_latex, to_text
from .symcore import Deriv, Expr, Sym, SymKind, atom_by_id, deriv, sym


class SolvableByQuadrature(ValueError):
    """The ODE has a single monomial and is integrated directly."""


@dataclass(frozen=True)
class WaveSub:
    wave_params: tuple
    wave_var: Sym

    @classmethod
    def default(cls, independents, var_name: str = "xi") -> "WaveSub":
        n = len(independents)
        if n == 1:
            names = ["alpha"]
        elif n == 2:
            names = ["alpha", "beta"]
        else:
            names = [f"alpha{i + 1}" for i in range(n)]
        return cls(tuple(sym(nm, SymKind.WAVE_PARAM) for nm in names),
                   sym(var_name, SymKind.INDEPENDENT))


@dataclass(frozen=True)
class OdeSpec:
    dependent: Sym
    variable: Sym
    lhs: Expr
    params: tuple = ()

    def order_of(self, mono_expr: Expr) -> int:
        return max((a.total for a in mono_expr.atoms()
                    if isinstance(a, Deriv) and a.fn is self.dependent), default=0)

    def v_degree(self, mono_expr: Expr) -> int:
        (m, _), = mono_expr.terms.items()
        return sum(e for aid, e in m if _is_v_atom(atom_by_id(aid), self.dependent))

    def __str__(self):
        return to_text(self.lhs) + " = 0"

    def latex(self) -> str:
        return to_latex(self.lhs) + "=0"


def _is_v_atom(a, v: Sym) -> bool:
    return a is v or (isinstance(a, Deriv) and a.fn is v)


def v_derivative(v: Sym, xi: Sym, k: int) -> Expr:
    return Expr.atom(deriv(v, {xi: k}) if k else v)


def reduce_pde(p: PdeSpec, w: WaveSub | None = None, dependent: str = "v") -> OdeSpec:
    """Each partial derivative in x_i contributes alpha_i and one xi-derivative."""
    if w is None:
        w = WaveSub.default(p.independents)
    if len(w.wave_params) != len(p.independents):
        raise ValueError("one wave parameter per independent variable is required")
    v = sym(dependent, SymKind.DEPENDENT)
    alpha = dict(zip(p.independents, w.wave_params))
    table = {p.dependent: Expr.atom(v)}
    for a in p.lhs.atoms():
        if isinstance(a, Deriv) and a.fn is p.dependent:
            factor = Expr.const(1)
            for s, c in a.orders:
                factor = factor * Expr.atom(alpha[s]) ** c
            table[a] = factor * v_derivative(v, w.wave_var, a.total)
    lhs = p.lhs.subs(table)
    return OdeSpec(v, w.wave_var, lhs, tuple(p.params))


def monomial_split(o: OdeSpec) -> list[Expr]:
    """Monomials M1..Mnu: M1 has the highest derivative, M2 the designated
    nonlinear monomial (highest v-degree, ties by derivative order)."""
    monos = [Expr({m: c}) for m, c in o.lhs.sorted_terms()]
    if len(monos) < 2:
        raise SolvableByQuadrature("single-monomial ODE: solvable by successive integration")
    vmonos = [m for m in monos if o.v_degree(m) > 0]
    m1 = max(vmonos, key=lambda m: (o.order_of(m), -o.v_degree(m)))
    rest = [m for m in monos if m is not m1]
    nonlinear = [m for m in rest if o.v_degree(m) >= 2]
    pool = nonlinear or [m for m in rest if o.v_degree(m) >= 1] or rest
    m2 = max(pool, key=lambda m: (o.v_degree(m), o.order_of(m)))
    others = [m for m in rest if m is not m2]
    return [m1, m2] + others
