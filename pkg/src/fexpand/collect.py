"""Substitute an ansatz into a reduced ODE and extract the algebraic system."""

from __future__ import annotations

from dataclasses import dataclass, field

from .ansatz import AnsatzInstance
from .auxreg import AuxSystem
from .reduce import OdeSpec
from .symcore import Deriv, Expr, LaurentForm, Sym, atom_by_id, mpq, to_laurent


@dataclass(frozen=True)
class ResidualDecomposition:
    """``T * Q`` in canonical form, grouped by (kernel exponents, markers)."""

    form: LaurentForm
    T: tuple
    aux: AuxSystem = field(compare=False)

    def is_zero(self) -> bool:
        return len(self.form) == 0

    def evaluate(self, kernel_values, marker_values, values: dict) -> mpq:
        """Exact value of ``Q`` (T divided back out) at the given point."""
        total = mpq(0)
        for (ex, mk), coeff in self.form.terms.items():
            t = coeff.evaluate(values)
            for x, e in zip(kernel_values, ex):
                t *= x ** e
            for x, f in zip(marker_values, mk):
                if f:
                    t *= x
            total += t
        tden = mpq(1)
        for x, e in zip(kernel_values, self.T):
            tden *= x ** e
        return total / tden


@dataclass(frozen=True)
class AlgSystem:
    equations: tuple  # normalized Exprs, each "= 0"
    unknowns: tuple  # Syms
    side_conditions: tuple = ()  # Exprs assumed nonzero
    params: tuple = ()  # symbolic constants that are not solved for

    def __len__(self):
        return len(self.equations)


def ansatz_derivatives(inst: AnsatzInstance, k: int) -> list[Expr]:
    aux = inst.aux
    d = [inst.expanded]
    for _ in range(k):
        d.append(aux.dxi(d[-1]))
    return d


def substitute(o: OdeSpec, inst: AnsatzInstance) -> ResidualDecomposition:
    aux = inst.aux
    order = max((a.total for a in o.lhs.atoms() if isinstance(a, Deriv) and a.fn is o.dependent),
                default=0)
    derivs = ansatz_derivatives(inst, order)
    table = {o.dependent: derivs[0]}
    for a in o.lhs.atoms():
        if isinstance(a, Deriv) and a.fn is o.dependent:
            table[a] = derivs[a.total]
    q = o.lhs.subs(table)
    canon, t = aux.canonical(q)
    return ResidualDecomposition(to_laurent(canon, aux.kernels, aux.var), t, aux)


def normalize_equation(e: Expr) -> Expr:
    return e.primitive()


def extract_system(r: ResidualDecomposition, unknowns, params=(),
                   side_conditions=()) -> AlgSystem:
    seen = set()
    eqs = []
    for _, coeff in r.form:
        n = normalize_equation(coeff)
        if n.is_const():
            # a nonzero constant coefficient: the system is inconsistent
            n = Expr.const(1)
        if n not in seen:
            seen.add(n)
            eqs.append(n)
    return AlgSystem(tuple(eqs), tuple(unknowns), tuple(side_conditions), tuple(params))


def system_for(o: OdeSpec, inst: AnsatzInstance, wave_params) -> AlgSystem:
    r = substitute(o, inst)
    params = tuple(sorted(o.params, key=lambda s: s.id))
    return extract_system(r, tuple(inst.coeffs) + tuple(wave_params), params=params)
