"""Expansion ansaetze and order balancing.

An ansatz of arity n has 2^n blocks, one per subset of first-derivative
markers: block S contributes ``prod_{i in S} D(K_i) * sum c * prod K_j^e_j``
with each exponent ``e_j`` ranging over ``-order_j .. order_j``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .auxreg import AuxSystem, Identity, Rule
from .reduce import OdeSpec, monomial_split
from .symcore import Deriv, Expr, Sym, SymKind, atom_by_id, mpq, sym

BLOCK_LETTERS = "abcdefgh"


class NoBalanceError(ValueError):
    pass


class ArityMismatch(ValueError):
    pass


def block_keys(arity: int) -> list[tuple]:
    """Marker subsets in the order A, B(F'), C(G'), D(F'G'), ..."""
    return [tuple((n >> i) & 1 for i in range(arity)) for n in range(2 ** arity)]


@dataclass(frozen=True)
class AnsatzShape:
    arity: int
    orders: tuple  # one tuple of per-kernel orders per block, in block_keys order

    def __post_init__(self):
        if len(self.orders) != 2 ** self.arity:
            raise ValueError("one order vector per block is required")
        for o in self.orders:
            if len(o) != self.arity or any((not isinstance(x, int)) or x < 0 for x in o):
                raise ValueError(f"invalid order vector {o!r}")

    @classmethod
    def single(cls, m: int, mhat: int) -> "AnsatzShape":
        return cls(1, ((m,), (mhat,)))

    @classmethod
    def uniform(cls, arity: int, n: int) -> "AnsatzShape":
        return cls(arity, tuple((n,) * arity for _ in range(2 ** arity)))

    def block(self, key: tuple) -> tuple:
        return self.orders[block_keys(self.arity).index(key)]

    def flat(self) -> list[int]:
        return [x for o in self.orders for x in o]

    def as_dict(self) -> dict:
        keys = block_keys(self.arity)
        return {BLOCK_LETTERS[i]: list(o) for i, o in enumerate(self.orders) if i < len(keys)}

    def __str__(self):
        if self.arity == 1:
            return f"m={self.orders[0][0]}, mhat={self.orders[1][0]}"
        return ", ".join(f"{k}={tuple(v)}" for k, v in self.as_dict().items())


def coeff_name(letter: str, idx: tuple) -> str:
    if len(idx) == 1:
        i = idx[0]
        return f"{letter}{'m' if i < 0 else ''}{abs(i)}"
    return letter + "".join(f"{'m' if i < 0 else 'p'}{abs(i)}" for i in idx)


@dataclass(frozen=True)
class AnsatzInstance:
    shape: AnsatzShape
    aux: AuxSystem = field(compare=False)
    coeffs: tuple  # Syms in construction order
    body: Expr
    index: dict = field(compare=False, default_factory=dict)  # Sym -> (block key, exps)

    @property
    def expanded(self) -> Expr:
        """Body with explicit-rule markers substituted."""
        return self.aux.reduce_marker(self.body)


def build(shape: AnsatzShape, aux: AuxSystem) -> AnsatzInstance:
    if shape.arity != aux.arity:
        raise ArityMismatch(f"shape arity {shape.arity} does not match aux arity {aux.arity}")
    coeffs = []
    index = {}
    body = Expr()
    for bi, key in enumerate(block_keys(shape.arity)):
        orders = shape.orders[bi]
        mk = tuple(sorted((aux.marker(i).id, 1) for i in range(aux.arity) if key[i]))
        ranges = [range(-o, o + 1) for o in orders]
        for idx in itertools.product(*ranges):
            c = sym(coeff_name(BLOCK_LETTERS[bi], idx), SymKind.ANSATZ_COEFF)
            coeffs.append(c)
            index[c] = (key, idx)
            mono = tuple(sorted([(aux.kernels[i].id, e) for i, e in enumerate(idx) if e]
                                + list(mk)))
            body = body + Expr({tuple(sorted(((c.id, 1),) + mono)): mpq(1)})
    return AnsatzInstance(shape, aux, tuple(coeffs), body, index)


# ---------------------------------------------------------------------------
# degree arithmetic on supports


def _shadow_poly(e: Expr, keep_ids) -> Expr:
    """Positive shadow: every monomial restricted to ``keep_ids`` with coefficient 1."""
    out = {}
    for m in e.terms:
        out[tuple(p for p in m if p[0] in keep_ids)] = mpq(1)
    return Expr(out)


def shadow_aux(aux: AuxSystem) -> AuxSystem:
    """The same kernels with all rule/identity coefficients replaced by 1.

    Arithmetic in the shadow never cancels, so the support of any result is
    the formal support: the union of all exponents that can occur.
    """
    keep = {k.id for k in aux.kernels} | {aux.marker(i).id for i in range(aux.arity)}
    rules = tuple(Rule(r.kind, _shadow_poly(r.rhs, keep)) for r in aux.rules)
    idents = tuple(Identity(i.kernel, _shadow_poly(i.replacement, keep)) for i in aux.identities)
    return AuxSystem(aux.name + "-shadow", aux.kernels, rules, aux.var, idents)


class _Support:
    def __init__(self, aux: AuxSystem):
        self.aux = aux
        self.sh = shadow_aux(aux)
        self.keep = {k.id for k in aux.kernels} | {aux.marker(i).id for i in range(aux.arity)}

    def flat(self, e: Expr) -> Expr:
        return _shadow_poly(e, self.keep)

    def derivatives(self, body: Expr, k: int) -> list[Expr]:
        d = [self.flat(self.sh.reduce_marker(body))]
        for _ in range(k):
            d.append(self.flat(self.sh.dxi(d[-1])))
        return d

    def monomial(self, mono: Expr, o: OdeSpec, derivs: list[Expr]) -> Expr:
        (m, _), = mono.terms.items()
        out = Expr.const(1)
        for aid, ex in m:
            a = atom_by_id(aid)
            if a is o.dependent:
                k = 0
            elif isinstance(a, Deriv) and a.fn is o.dependent:
                k = a.total
            else:
                continue
            for _ in range(ex):
                out = self.flat(self.sh.reduce_markers(out * derivs[k]))
        return self.flat(self.sh.apply_identities(out))


@dataclass(frozen=True)
class DegreeRecord:
    """Per marker component: per kernel (max exponent, min exponent)."""

    components: dict

    def top(self, kernel: int = 0) -> int:
        return max(c[kernel][0] for c in self.components.values())

    def bottom(self, kernel: int = 0) -> int:
        return min(c[kernel][1] for c in self.components.values())

    def bottoms(self) -> tuple:
        n = len(next(iter(self.components.values())))
        return tuple(self.bottom(i) for i in range(n))


def _record(e: Expr, aux: AuxSystem) -> DegreeRecord | None:
    if e.is_zero():
        return None
    kid = {k.id: i for i, k in enumerate(aux.kernels)}
    mid = {aux.marker(i).id: i for i in range(aux.arity)}
    comps: dict = {}
    for m in e.terms:
        ex = [0] * aux.arity
        mk = [0] * aux.arity
        for aid, p in m:
            if aid in kid:
                ex[kid[aid]] = p
            elif aid in mid:
                mk[mid[aid]] = 1
        cur = comps.setdefault(tuple(mk), [[x, x] for x in ex])
        for i, x in enumerate(ex):
            cur[i][0] = max(cur[i][0], x)
            cur[i][1] = min(cur[i][1], x)
    return DegreeRecord({k: tuple(tuple(v) for v in vs) for k, vs in sorted(comps.items())})


def _max_order(o: OdeSpec) -> int:
    return max(o.order_of(Expr({m: c})) for m, c in o.lhs.terms.items())


def formal_degree(mono: Expr, shape: AnsatzShape, aux: AuxSystem, o: OdeSpec,
                  block: tuple | None = None) -> DegreeRecord | None:
    """Extremal kernel exponents of one ODE monomial after substitution.

    Computed on supports (no coefficient cancellation).  ``block`` restricts
    the ansatz to a single marker block.  Returns None when the monomial
    vanishes identically (e.g. v'' for a constant ansatz).
    """
    sup = _Support(aux)
    inst = build(shape, aux)
    body = inst.body
    if block is not None:
        body = Expr({m: c for m, c in body.terms.items()
                     if inst.index[atom_by_id(_coeff_atom(m, inst))][0] == block})
    body = _strip_coeffs(body, inst)
    derivs = sup.derivatives(body, _max_order(o))
    return _record(sup.monomial(mono, o, derivs), aux)


def _coeff_atom(m, inst: AnsatzInstance) -> int:
    ids = {c.id for c in inst.coeffs}
    for aid, _ in m:
        if aid in ids:
            return aid
    raise KeyError("monomial without ansatz coefficient")


def _strip_coeffs(body: Expr, inst: AnsatzInstance) -> Expr:
    ids = {c.id for c in inst.coeffs}
    return Expr.from_terms((tuple(p for p in m if p[0] not in ids), mpq(1)) for m in body.terms)


@dataclass(frozen=True)
class BalanceResult:
    shape: AnsatzShape
    m1: Expr
    m2: Expr
    degenerate: bool = False
    notes: tuple = ()


def balance(o: OdeSpec, aux: AuxSystem, arity: int | None = None, max_order: int = 12) -> BalanceResult:
    """Pole-order balancing of M1 against M2, block by block.

    For each marker block the smallest order vector (searched by increasing
    total, then lexicographically, each order at least 1) is chosen such that
    for every kernel the lowest exponent contributed by M1 equals the lowest
    exponent contributed by M2.
    """
    arity = aux.arity if arity is None else arity
    if arity != aux.arity:
        raise ArityMismatch(f"arity {arity} does not match aux {aux.name!r} ({aux.arity} kernels)")
    if max_order < 1:
        raise ValueError("max-order must be at least 1")
    monos = monomial_split(o)
    m1, m2 = monos[0], monos[1]
    sup = _Support(aux)
    k_needed = _max_order(o)
    orders = []
    for key in block_keys(arity):
        found = None
        grid = sorted(itertools.product(range(1, max_order + 1), repeat=arity),
                      key=lambda n: (sum(n), n))
        for n in grid:
            body = _block_body(aux, key, n)
            derivs = sup.derivatives(body, k_needed)
            r1 = _record(sup.monomial(m1, o, derivs), aux)
            r2 = _record(sup.monomial(m2, o, derivs), aux)
            if r1 is None or r2 is None:
                continue
            if r1.bottoms() == r2.bottoms():
                found = n
                break
        if found is None:
            raise NoBalanceError(
                f"no balancing orders <= {max_order} for block {BLOCK_LETTERS[block_keys(arity).index(key)]}"
                f" with aux {aux.name!r}; raise --max-order, choose another aux or pass --orders")
        orders.append(tuple(found))
    return BalanceResult(AnsatzShape(arity, tuple(orders)), m1, m2)


def _block_body(aux: AuxSystem, key: tuple, n: tuple) -> Expr:
    mk = [(aux.marker(i).id, 1) for i in range(aux.arity) if key[i]]
    terms = {}
    for idx in itertools.product(*[range(-x, x + 1) for x in n]):
        mono = tuple(sorted([(aux.kernels[i].id, e) for i, e in enumerate(idx) if e] + mk))
        terms[mono] = mpq(1)
    return Expr(terms)


# ---------------------------------------------------------------------------
# redundancy between blocks


@dataclass(frozen=True)
class Compression:
    """Reduced ansatz with redundant coefficients set to zero.

    Under the aux rules and identities, different blocks can produce the same
    kernel functions (with tanh, ``F' F^-1 = F^-1 - F``).  The ansatz value
    depends on the coefficients only through the linear forms ``w_j``; the
    pivot coefficient of each form is kept and the remaining ones are zero in
    the reduced ansatz.  ``relations`` maps each pivot ``p`` to the
    coefficients ``{n: r}`` with ``w_p = p + sum r * n``.
    """

    full: AnsatzInstance
    reduced: AnsatzInstance
    pivots: tuple
    dropped: tuple
    relations: dict

    def lift(self, values: dict, free=()) -> dict:
        """Map a reduced-ansatz assignment (Sym -> Expr) to the full ansatz.

        Dropped coefficients become free.  A pivot that is free in the
        reduced family stays free; references to its form value elsewhere are
        rewritten as ``p + sum r * n``.
        """
        free = set(free)
        form = {p: Expr.atom(p) + sum((Expr.atom(n).scale(r) for n, r in self.relations[p].items()),
                                      Expr())
                for p in self.pivots}
        back = {p: form[p] for p in self.pivots if p in free and p not in values}
        out = {}
        for s, v in values.items():
            out[s] = v.subs(back) if back else v
        for p in self.pivots:
            if p in back or p not in out:
                continue
            out[p] = out[p] - (form[p] - Expr.atom(p))
        return out


def _rref(rows: list, ncols: int) -> tuple[list, list]:
    """Exact reduced row echelon form; returns (rows, pivot columns)."""
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def compress(inst: AnsatzInstance) -> Compression:
    aux = inst.aux
    ex = inst.expanded
    canon, _ = aux.canonical(ex)
    cid = {c.id: j for j, c in enumerate(inst.coeffs)}
    rows: dict = {}
    for m, v in canon.terms.items():
        cpart = [aid for aid, _ in m if aid in cid]
        if len(cpart) != 1:
            raise ValueError("ansatz is not linear in its coefficients")
        rest = tuple(p for p in m if p[0] not in cid)
        rows.setdefault(rest, [mpq(0)] * len(inst.coeffs))[cid[cpart[0]]] += v
    ordered = [rows[k] for k in sorted(rows)]
    rref, piv = _rref(ordered, len(inst.coeffs))
    pivots = tuple(inst.coeffs[c] for c in piv)
    dropped = tuple(c for j, c in enumerate(inst.coeffs) if j not in set(piv))
    relations = {}
    for row, c in zip(rref, piv):
        relations[inst.coeffs[c]] = {inst.coeffs[j]: row[j] for j in range(len(row))
                                    if j != c and row[j]}
    zero = {d: Expr() for d in dropped}
    body = inst.body.subs(zero) if zero else inst.body
    index = {c: inst.index[c] for c in pivots}
    reduced = AnsatzInstance(inst.shape, aux, pivots, body, index)
    return Compression(inst, reduced, pivots, dropped, relations)
