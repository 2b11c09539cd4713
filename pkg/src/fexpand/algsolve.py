"""Budgeted exact solver for polynomial systems over Q.

Depth-first search over case splits.  At each node: substitute known
values, normalize, eliminate an unknown that occurs linearly with a
known-nonzero monomial coefficient, otherwise split on the factors of an
equation, otherwise hand small systems to a lexicographic Groebner basis.
Every emitted family is re-substituted into the original equations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache

import flint

from .groebner import GroebnerBudget, groebner_exprs
from .symcore import Expr, Sym, SymKind, atom_by_id, mpq


@dataclass(frozen=True)
class Budget:
    max_depth: int = 16
    max_branches: int = 4096
    timeout_seconds: float | None = None
    groebner_max_unknowns: int = 6
    groebner_max_basis: int = 200
    # coefficient growth limits; systems in at most 3 unknowns get the wide ones
    groebner_limits: tuple = (2000, 4096)
    groebner_limits_small: tuple = (20000, 1 << 15)


@dataclass(frozen=True)
class SolutionFamily:
    assignment: tuple  # ((Sym, Expr), ...) sorted by symbol id
    free: tuple  # Syms, sorted by id
    side_conditions: tuple = ()  # Exprs required nonzero
    provenance: tuple = ()  # case-split trace strings

    def as_dict(self) -> dict:
        return dict(self.assignment)

    def value(self, s: Sym) -> Expr:
        for k, v in self.assignment:
            if k is s:
                return v
        return Expr.atom(s)

    def key(self) -> tuple:
        return (tuple((k.id, v._key()) for k, v in self.assignment),
                tuple(s.id for s in self.free))

    def contains_point(self, point: dict) -> bool:
        """True if the exact point (Sym -> rational) belongs to the family."""
        vals = {s: point[s] for s in self.free if s in point}
        for s, v in self.assignment:
            needed = v.free_syms()
            if any(n not in vals and n not in point for n in needed):
                return False
            env = {n: (vals[n] if n in vals else point[n]) for n in needed}
            try:
                if v.evaluate(env) != point.get(s, mpq(0)):
                    return False
            except ZeroDivisionError:
                return False
        env = {s: point.get(s, mpq(0)) for c in self.side_conditions for s in c.free_syms()}
        return all(c.evaluate(env) != 0 for c in self.side_conditions)


@dataclass(frozen=True)
class Unresolved:
    equations: tuple
    assignment: tuple
    reason: str


@dataclass
class SolveResult:
    families: list
    complete: bool
    unresolved: list = field(default_factory=list)
    certificate: Expr | None = None
    nodes: int = 0

    def __iter__(self):
        return iter(self.families)

    def __len__(self):
        return len(self.families)


class _Exhausted(Exception):
    pass


# ---------------------------------------------------------------------------
# polynomial helpers


def clear_monomial(e: Expr) -> Expr:
    """Multiply by a monomial so every exponent is nonnegative, then make
    the result primitive.  Negative exponents only ever involve variables
    known to be nonzero, so this preserves the zero set."""
    if not e.terms:
        return e
    low: dict = {}
    for m in e.terms:
        for aid, p in m:
            if p < low.get(aid, 0):
                low[aid] = p
    if low:
        e = e.mul_monomial(tuple(sorted((k, -v) for k, v in low.items())))
    return e.primitive()


def _var_degree(e: Expr, vid: int) -> int:
    return max((dict(m).get(vid, 0) for m in e.terms), default=0)


def _vars(e: Expr) -> set:
    return {aid for m in e.terms for aid, _ in m}


def _is_definite(e: Expr) -> bool:
    signs = {c > 0 for c in e.terms.values()}
    return len(signs) == 1 and all(p % 2 == 0 for m in e.terms for _, p in m)


def _split_linear(e: Expr, vid: int):
    """e = c*x + r with c, r free of x.  Returns (c, r)."""
    c, r = {}, {}
    for m, v in e.terms.items():
        d = dict(m)
        p = d.get(vid, 0)
        if p == 1:
            c[tuple(q for q in m if q[0] != vid)] = v
        else:
            r[m] = v
    return Expr(c), Expr(r)


def _flint_ctx(n: int):
    return flint.fmpq_mpoly_ctx.get(tuple(f"z{i}" for i in range(n)), "lex")


def _to_flint(e: Expr):
    gens = sorted(_vars(e))
    pos = {g: i for i, g in enumerate(gens)}
    ctx = _flint_ctx(len(gens))
    terms = {}
    for m, c in e.terms.items():
        ex = [0] * len(gens)
        for aid, p in m:
            ex[pos[aid]] = p
        terms[tuple(ex)] = flint.fmpq(int(c.numerator), int(c.denominator))
    return ctx.from_dict(terms), gens


def _from_flint(p, gens) -> Expr:
    terms = {}
    for ex, c in p.to_dict().items():
        terms[tuple((g, int(e)) for g, e in zip(gens, ex) if e)] = mpq(int(c.p), int(c.q))
    return Expr(terms)


@lru_cache(maxsize=50000)
def _factor_cached(e: Expr) -> tuple:
    if not _vars(e):
        return ()
    p, gens = _to_flint(e)
    _, facs = p.factor()
    out = []
    for f, mult in facs:
        fe = clear_monomial(_from_flint(f, gens))
        if not fe.is_const():
            out.append((fe, int(mult)))
    out.sort(key=lambda fm: (fm[0].degree(), len(fm[0]), fm[0]._key()))
    return tuple(out)


def factor(e: Expr) -> tuple:
    """Irreducible factors over Q (primitive, monomial-free), with multiplicity."""
    return _factor_cached(e)


# ---------------------------------------------------------------------------
# solver


@dataclass
class _Node:
    eqs: list
    assign: dict  # atom id -> Expr
    nonzero: frozenset  # atom ids known nonzero
    side: tuple  # Exprs required nonzero (branch hypotheses)
    depth: int
    trace: tuple
    groebner_done: bool = False


class Solver:
    def __init__(self, equations, unknowns, budget: Budget | None = None,
                 params=(), nonzero=()):
        self.budget = budget or Budget()
        self.unknowns = tuple(unknowns)
        self.uid = {s.id: s for s in self.unknowns}
        # elimination preference: ansatz coefficients, then everything else
        self.rank = {s.id: (0 if s.kind == SymKind.ANSATZ_COEFF else 1, i)
                     for i, s in enumerate(self.unknowns)}
        self.params = tuple(params)
        self.original = [e for e in equations if not e.is_zero()]
        self.base_nonzero = frozenset(s.id for s in list(params) + list(nonzero))
        self.families: list = []
        self.unresolved: list = []
        self.nodes = 0
        self.complete = True
        self.certificate = None
        self._t0 = None

    # -- bookkeeping ---------------------------------------------------
    def _tick(self, depth: int):
        self.nodes += 1
        if self.nodes > self.budget.max_branches:
            raise _Exhausted("branch budget")
        if self.budget.timeout_seconds is not None and \
                time.monotonic() - self._t0 > self.budget.timeout_seconds:
            raise _Exhausted("timeout")

    def solve(self) -> SolveResult:
        self._t0 = time.monotonic()
        root = _Node([clear_monomial(e) for e in self.original], {}, self.base_nonzero, (), 0, ())
        try:
            self._search(root)
        except _Exhausted:
            self.complete = False
        fams = self._finalize()
        if not fams and self.certificate is None and self.complete and not self.unresolved:
            self.certificate = Expr.const(1)
        return SolveResult(fams, self.complete, self.unresolved, self.certificate if not fams else None,
                           self.nodes)

    # -- normalization -------------------------------------------------
    def _simplify(self, node: _Node):
        """Normalize equations; returns False on contradiction."""
        out = []
        seen = set()
        eqs = []
        for e in node.eqs:
            if len(e) > 1 and _is_definite(e):
                # a sum of even monomials with one sign: over the reals every
                # monomial vanishes separately
                eqs.extend(Expr({m: mpq(1)}) for m in e.terms)
            else:
                eqs.append(e)
        for e in eqs:
            e = self._strip_nonzero(clear_monomial(e), node.nonzero)
            if e.is_zero():
                continue
            if e.is_const():
                if self.certificate is None:
                    self.certificate = e
                return False
            if e not in seen:
                seen.add(e)
                out.append(e)
        out.sort(key=lambda e: (len(e), e.degree(), e._key()))
        node.eqs = out
        return True

    @staticmethod
    def _strip_nonzero(e: Expr, nonzero) -> Expr:
        """Divide out variables known to be nonzero that divide every term."""
        if not e.terms:
            return e
        common = None
        for m in e.terms:
            d = {aid: p for aid, p in m if aid in nonzero and p > 0}
            common = d if common is None else {k: min(v, d[k]) for k, v in common.items() if k in d}
            if not common:
                return e
        shift = tuple(sorted((k, -v) for k, v in common.items()))
        return e.mul_monomial(shift)

    def _substitute(self, node: _Node, vid: int, value: Expr) -> _Node:
        s = atom_by_id(vid)
        assign = {k: v.subs({s: value}) for k, v in node.assign.items()}
        assign[vid] = value
        eqs = [e.subs({s: value}) for e in node.eqs]
        side = tuple(c.subs({s: value}) for c in node.side)
        return _Node(eqs, assign, node.nonzero, side, node.depth, node.trace)

    # -- search --------------------------------------------------------
    def _search(self, node: _Node):
        self._tick(node.depth)
        while True:
            if not self._simplify(node):
                return
            if any(c.is_zero() for c in node.side):
                return
            if not node.eqs:
                self._emit(node)
                return
            lin = self._pick_linear(node)
            if lin is None:
                break
            vid, value, label = lin
            node = self._substitute(node, vid, value)
            node.trace = node.trace + (label,)
        self._branch(node)

    def _pick_linear(self, node: _Node):
        best = None
        # a variable that already occurs as a denominator may only take
        # monomial values, keeping every assignment a Laurent polynomial
        inverted = {aid for v in node.assign.values() for m in v.terms for aid, p in m if p < 0}
        for e in node.eqs:
            for vid in sorted(_vars(e)):
                if vid not in self.uid or vid in node.assign:
                    continue
                if _var_degree(e, vid) != 1:
                    continue
                c, r = _split_linear(e, vid)
                if not c.is_monomial():
                    continue
                (cm, cc), = c.terms.items()
                if any(aid not in node.nonzero for aid, _ in cm):
                    continue
                if vid in inverted and not r.is_monomial():
                    continue
                score = (not c.is_const(), len(r), self.rank[vid], len(e), vid)
                if best is None or score < best[0]:
                    best = (score, vid, c, r)
        if best is None:
            return None
        _, vid, c, r = best
        value = (-r) / c
        return vid, value, f"{atom_by_id(vid).name}={value}"

    def _depth_exceeded(self, node: _Node) -> bool:
        if node.depth < self.budget.max_depth:
            return False
        self.complete = False
        self.unresolved.append(Unresolved(tuple(node.eqs), self._assign_tuple(node.assign),
                                          "depth budget exhausted"))
        return True

    def _branch(self, node: _Node):
        if self._depth_exceeded(node):
            return
        split = self._pick_split(node)
        if split is not None:
            eq, facs = split
            if len(facs) == 1:
                f = facs[0][0]
                node.eqs = [f if x is eq else x for x in node.eqs]
                node.trace = node.trace + (f"{f}=0",)
                self._search(node)
                return
            cur = node
            for f, _ in facs:
                child = _Node([f if x is eq else x for x in cur.eqs], dict(cur.assign),
                              cur.nonzero, cur.side, node.depth + 1, cur.trace + (f"{f}=0",))
                self._search(child)
                cur = self._with_nonzero(cur, f)
            return
        if self._groebner_applicable(node):
            self._groebner(node)
            return
        self._split_variable(node)

    def _split_variable(self, node: _Node):
        uvars = sorted({v for e in node.eqs for v in _vars(e)
                        if v in self.uid and v not in node.nonzero})
        if self._depth_exceeded(node):
            return
        if not uvars:
            self.unresolved.append(Unresolved(tuple(node.eqs), self._assign_tuple(node.assign),
                                              "no rational elimination step applies"))
            return
        # x = 0 versus x != 0 on the most frequent variable
        vid = max(uvars, key=lambda v: (sum(1 for e in node.eqs if v in _vars(e)),
                                        -self.rank[v][0], -v))
        x = Expr.atom(atom_by_id(vid))
        self._search(_Node(node.eqs + [x], dict(node.assign), node.nonzero, node.side,
                           node.depth + 1, node.trace + (f"{x}=0",)))
        nn = self._with_nonzero(node, x)
        nn.depth += 1
        self._search(nn)

    def _with_nonzero(self, node: _Node, f: Expr):
        """Node with hypothesis f != 0 recorded (None if f is identically 0)."""
        if f.is_zero():
            return None
        if len(f) == 1:
            (m, _), = f.terms.items()
            nz = node.nonzero | {aid for aid, _ in m}
            return _Node(list(node.eqs), dict(node.assign), frozenset(nz), node.side,
                         node.depth, node.trace + (f"{f}!=0",))
        return _Node(list(node.eqs), dict(node.assign), node.nonzero, node.side + (f,),
                     node.depth, node.trace + (f"{f}!=0",))

    def _pick_split(self, node: _Node):
        """An equation with at least two factors that are not known nonzero."""
        best = None
        for e in node.eqs:
            facs = [fm for fm in factor(e) if not self._known_nonzero(fm[0], node)]
            if not facs:
                continue
            if len(facs) == 1 and facs[0][1] == 1 and facs[0][0] == e:
                continue
            if len(facs) == 1:
                # drop multiplicity / nonzero cofactors: replace by the bare factor
                score = (0, 0, len(facs[0][0]))
            else:
                score = (1, len(facs), sum(len(f) for f, _ in facs))
            if best is None or score < best[0]:
                best = (score, e, facs)
        if best is None:
            return None
        _, e, facs = best
        if len(facs) == 1:
            return e, facs
        return e, facs

    def _known_nonzero(self, f: Expr, node: _Node) -> bool:
        if f.is_const():
            return not f.is_zero()
        if len(f) == 1:
            (m, _), = f.terms.items()
            return all(aid in node.nonzero for aid, _ in m)
        return any(f == c or f == -c for c in node.side)

    def _groebner_applicable(self, node: _Node) -> bool:
        if node.groebner_done:
            return False
        vs = {v for e in node.eqs for v in _vars(e)}
        if any(v not in self.uid for v in vs):
            return False
        return 0 < len(vs) <= self.budget.groebner_max_unknowns

    def _groebner(self, node: _Node):
        vs = sorted({v for e in node.eqs for v in _vars(e)}, key=lambda v: self.rank[v])
        try:
            terms, bits = (self.budget.groebner_limits_small if len(vs) <= 3
                           else self.budget.groebner_limits)
            gb = groebner_exprs(node.eqs, vs, self.budget.groebner_max_basis, terms, bits)
        except GroebnerBudget:
            self.unresolved.append(Unresolved(tuple(node.eqs), self._assign_tuple(node.assign),
                                              "groebner budget exhausted"))
            self.complete = False
            return
        child = _Node(gb, dict(node.assign), node.nonzero, node.side, node.depth,
                      node.trace + ("groebner",), groebner_done=True)
        if not self._simplify(child):
            return
        if not child.eqs:
            self._emit(child)
            return
        if self._pick_linear(child) is not None or self._pick_split(child) is not None:
            self._search(child)
            return
        # remaining univariate irreducible of degree >= 2: no rational root
        for e in child.eqs:
            if len(_vars(e)) == 1:
                self.unresolved.append(Unresolved(tuple(child.eqs), self._assign_tuple(child.assign),
                                                  f"irrational roots of {e}"))
                return
        self._split_variable(child)

    # -- output --------------------------------------------------------
    def _assign_tuple(self, assign: dict) -> tuple:
        return tuple(sorted(((atom_by_id(k), v) for k, v in assign.items()), key=lambda kv: kv[0].id))

    def _emit(self, node: _Node):
        assign = {k: v for k, v in node.assign.items()}
        free = tuple(sorted((s for s in self.unknowns if s.id not in assign), key=lambda s: s.id))
        dens = set()
        for v in assign.values():
            for m in v.terms:
                for aid, p in m:
                    if p < 0:
                        dens.add(aid)
        side = tuple(Expr.atom(atom_by_id(a)) for a in sorted(dens))
        fam = SolutionFamily(self._assign_tuple(assign), free, side, node.trace)
        self.families.append(fam)

    def check(self, fam: SolutionFamily) -> bool:
        table = {s: v for s, v in fam.assignment}
        for e in self.original:
            if not e.subs(table).is_zero():
                return False
        return True

    def _finalize(self) -> list:
        fams = []
        for f in self.families:
            if not self.check(f):
                raise AssertionError(f"unsound family emitted: {f}")
            fams.append(f)
        fams = _dedupe(fams)
        return sorted(fams, key=family_sort_key)


def family_sort_key(f: SolutionFamily):
    return (-len(f.free), len(f.assignment), f.key())


def _generic_values(f: SolutionFamily) -> dict:
    """Symbolic point of the family: Sym -> Expr."""
    vals = {s: Expr.atom(s) for s in f.free}
    for s, v in f.assignment:
        vals[s] = v
    return vals


def subsumes(big: SolutionFamily, small: SolutionFamily) -> bool:
    """True if every point of ``small`` lies in ``big`` (checked symbolically)."""
    pt = _generic_values(small)
    table = {s: pt[s] for s in big.free if s in pt}
    for s, v in big.assignment:
        if s not in pt:
            return False
        try:
            if not (v.subs(table) - pt[s]).is_zero():
                return False
        except Exception:
            return False
    for c in big.side_conditions:
        try:
            if c.subs(table).is_zero():
                return False
        except Exception:
            return False
    return True


def _dedupe(fams: list) -> list:
    fams = sorted(fams, key=family_sort_key)
    kept: list = []
    for f in fams:
        if any(k.key() == f.key() for k in kept):
            continue
        if any(subsumes(k, f) for k in kept):
            continue
        kept = [k for k in kept if not subsumes(f, k)] + [f]
    return sorted(kept, key=family_sort_key)


def solve_system(system, budget: Budget | None = None, nonzero=()) -> SolveResult:
    """Solve an ``AlgSystem`` (or any object with ``equations``, ``unknowns``)."""
    eqs = list(system.equations)
    if not eqs:
        raise ValueError("empty system: the ansatz satisfies the equation identically")
    params = tuple(getattr(system, "params", ()))
    s = Solver(eqs, system.unknowns, budget, params=params, nonzero=nonzero)
    return s.solve()


def mirror_pairs(fams: list) -> list:
    """Pairs (i, j) of families equal up to the sign of some values
    (the two branches of an epsilon = +-1 family)."""
    out = []
    for i in range(len(fams)):
        for j in range(i + 1, len(fams)):
            a, b = fams[i], fams[j]
            if [s.id for s, _ in a.assignment] != [s.id for s, _ in b.assignment]:
                continue
            if [s.id for s in a.free] != [s.id for s in b.free]:
                continue
            differs = False
            ok = True
            for (s, va), (_, vb) in zip(a.assignment, b.assignment):
                if va == vb:
                    continue
                if va == -vb:
                    differs = True
                    continue
                ok = False
                break
            if ok and differs:
                out.append((i, j))
    return out
