"""Lexicographic Groebner bases via FLINT's Buchberger implementation.

Inputs are polynomials over Q; denominators are cleared before the basis is
computed over Z, which spans the same ideal over Q.
"""

from __future__ import annotations

from math import lcm

import flint

from .symcore import Expr, mpq


class GroebnerBudget(RuntimeError):
    pass


def _ctx(n: int):
    return flint.fmpz_mpoly_ctx.get(tuple(f"z{i}" for i in range(n)), "lex")


def to_flint(e: Expr, var_ids: list, ctx):
    pos = {v: i for i, v in enumerate(var_ids)}
    den = lcm(*(int(c.denominator) for c in e.terms.values())) if e.terms else 1
    terms = {}
    for m, c in e.terms.items():
        ex = [0] * len(var_ids)
        for aid, p in m:
            if aid not in pos or p < 0:
                raise ValueError("polynomial has a coefficient outside Q[vars]")
            ex[pos[aid]] = p
        terms[tuple(ex)] = int(c * den)
    return ctx.from_dict(terms)


def from_flint(p, var_ids: list) -> Expr:
    terms = {}
    for ex, c in p.to_dict().items():
        terms[tuple(sorted((var_ids[i], int(e)) for i, e in enumerate(ex) if e))] = mpq(int(c))
    return Expr(terms)


def groebner_exprs(eqs: list, var_ids: list, max_basis: int = 200,
                   max_terms: int = 20000, max_bits: int = 1 << 15) -> list:
    """Reduced lex basis; the first variable is the largest.  Raises
    GroebnerBudget when a size limit is hit before the basis is complete."""
    ctx = _ctx(len(var_ids))
    vec = flint.fmpz_mpoly_vec([to_flint(e, var_ids, ctx) for e in eqs if e.terms], ctx)
    gb, ok = vec.buchberger_naive(limits=(max_basis, max_terms, max_bits))
    if not ok:
        raise GroebnerBudget("groebner size limit reached")
    gb = gb.autoreduction()
    out = [from_flint(gb[i], var_ids).primitive() for i in range(len(gb))]
    return [g for g in out if g.terms]
