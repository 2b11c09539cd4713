"""Exact symbolic core: rationals, interned atoms and sparse Laurent polynomials.

Every expression is kept in a single canonical shape: a sparse mapping from
monomials to rational coefficients, where a monomial is a sorted tuple of
``(atom_id, exponent)`` pairs.  Atoms are symbols, derivative atoms (``u_xx``,
``D^k F``) and kernel applications (``tanh(phi)``).  Exponents are integers
and may be negative, so Laurent forms need no separate machinery.  Two
expressions are structurally equal iff their term mappings are equal.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping

from gmpy2 import mpq

Rational = mpq

Monomial = tuple  # tuple[tuple[int, int], ...], sorted by atom id


def Q(num, den=1) -> mpq:
    """Exact rational from ints, strings ('3/4') or other rationals."""
    if isinstance(num, float):
        raise TypeError("floating point values are not allowed in exact arithmetic")
    if den == 1:
        return mpq(num)
    return mpq(num) / mpq(den)


class SymKind(str, Enum):
    INDEPENDENT = "independent-var"
    DEPENDENT = "dependent-var"
    WAVE_PARAM = "wave-param"
    ANSATZ_COEFF = "ansatz-coeff"
    KERNEL = "kernel"
    MODULUS = "modulus"
    FREE = "free-constant"


# ---------------------------------------------------------------------------
# atoms

_lock = threading.Lock()
_atoms: list = []
_atom_index: dict = {}


def _intern(key, factory):
    atom = _atom_index.get(key)
    if atom is not None:
        return atom
    with _lock:
        atom = _atom_index.get(key)
        if atom is None:
            atom = factory(len(_atoms))
            _atoms.append(atom)
            _atom_index[key] = atom
    return atom


def atom_by_id(i: int):
    return _atoms[i]


@dataclass(frozen=True, eq=False)
class Sym:
    name: str
    kind: SymKind
    id: int = field(repr=False)

    def __repr__(self):
        return f"Sym({self.name!r})"

    def __str__(self):
        return self.name

    def __lt__(self, other):
        return self.id < other.id

    @property
    def is_function(self) -> bool:
        return self.kind in (SymKind.DEPENDENT, SymKind.KERNEL)


def sym(name: str, kind: SymKind | str | None = None) -> Sym:
    """Intern a symbol.

    The kind is fixed when the symbol is first created; later lookups with a
    different kind return the existing symbol unchanged.
    """
    kind = SymKind(kind) if kind is not None else SymKind.FREE
    return _intern(("sym", name), lambda i: Sym(name, kind, i))


def symbols(names: str | Iterable[str], kind=None) -> list[Sym]:
    if isinstance(names, str):
        names = names.replace(",", " ").split()
    return [sym(n, kind) for n in names]


@dataclass(frozen=True, eq=False)
class Deriv:
    """Derivative atom of a function symbol: ``u_xt`` or ``D^k(F)``."""

    fn: Sym
    orders: tuple  # ((Sym, count), ...) sorted by symbol id
    id: int = field(repr=False)

    @property
    def total(self) -> int:
        return sum(c for _, c in self.orders)

    def __repr__(self):
        return f"Deriv({self.fn.name}, {[(s.name, c) for s, c in self.orders]})"


def deriv(fn: Sym, orders: Mapping[Sym, int] | Iterable) -> "Deriv | Sym":
    items = orders.items() if isinstance(orders, Mapping) else orders
    acc: dict = {}
    for s, c in items:
        if c:
            acc[s] = acc.get(s, 0) + c
    if not acc:
        return fn
    key_orders = tuple(sorted(acc.items(), key=lambda p: p[0].id))
    key = ("deriv", fn.id, tuple((s.id, c) for s, c in key_orders))
    return _intern(key, lambda i: Deriv(fn, key_orders, i))


def marker(kernel: Sym, var: Sym, order: int = 1) -> Deriv:
    """The derivative marker ``D^order(kernel)`` with respect to ``var``."""
    return deriv(kernel, {var: order})


@dataclass(frozen=True, eq=False)
class Apply:
    """A kernel function applied to an argument, e.g. ``tanh(phi)``."""

    fn: str
    arg: "Expr"
    params: tuple  # extra Expr arguments, e.g. the elliptic modulus
    id: int = field(repr=False)

    def __repr__(self):
        return f"Apply({self.fn}, {self.arg})"


def apply(fn: str, arg: "Expr", *params: "Expr") -> "Expr":
    arg = as_expr(arg)
    params = tuple(as_expr(p) for p in params)
    key = ("apply", fn, arg._key(), tuple(p._key() for p in params))
    return Expr.atom(_intern(key, lambda i: Apply(fn, arg, params, i)))


# ---------------------------------------------------------------------------
# monomial helpers


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        n = d.get(k, 0) + e
        if n:
            d[k] = n
        else:
            del d[k]
    return tuple(sorted(d.items()))


def mono_pow(a: Monomial, n: int) -> Monomial:
    if n == 0:
        return ()
    return tuple((k, e * n) for k, e in a)


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_sort_key(m: Monomial):
    # graded lexicographic, by atom creation order
    return (-mono_degree(m), tuple((k, -e) for k, e in m))


class NonPolynomialError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# expressions


class Expr:
    """Immutable sparse Laurent polynomial over interned atoms."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: dict | None = None):
        self.terms = terms if terms is not None else {}
        self._hash = None

    # construction -----------------------------------------------------
    @staticmethod
    def const(c) -> "Expr":
        c = Q(c) if not isinstance(c, mpq) else c
        return Expr({(): c}) if c else Expr()

    @staticmethod
    def atom(a, exp: int = 1) -> "Expr":
        return Expr({((a.id, exp),): mpq(1)})

    @staticmethod
    def from_terms(items: Iterable) -> "Expr":
        out: dict = {}
        for m, c in items:
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Expr(out)

    # basic queries ----------------------------------------------------
    def _key(self):
        return tuple(sorted(self.terms.items()))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, Expr):
            try:
                other = as_expr(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def const_value(self) -> mpq:
        if not self.is_const():
            raise ValueError(f"not a constant: {self}")
        return self.terms.get((), mpq(0))

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def atoms(self) -> set:
        return {atom_by_id(k) for m in self.terms for k, _ in m}

    def atom_ids(self) -> set:
        return {k for m in self.terms for k, _ in m}

    def free_syms(self) -> set:
        """Symbols appearing anywhere, including inside applications."""
        out = set()
        for a in self.atoms():
            if isinstance(a, Sym):
                out.add(a)
            elif isinstance(a, Deriv):
                out.add(a.fn)
                out.update(s for s, _ in a.orders)
            else:
                out |= a.arg.free_syms()
                for p in a.params:
                    out |= p.free_syms()
        return out

    def degree(self, a=None) -> int:
        if not self.terms:
            return -1
        if a is None:
            return max(mono_degree(m) for m in self.terms)
        return max(dict(m).get(a.id, 0) for m in self.terms)

    def low_degree(self, a) -> int:
        return min(dict(m).get(a.id, 0) for m in self.terms)

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda t: mono_sort_key(t[0]))

    def leading(self):
        return self.sorted_terms()[0]

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = as_expr(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Expr(out)

    __radd__ = __add__

    def __neg__(self):
        return Expr({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-as_expr(other))

    def __rsub__(self, other):
        return as_expr(other) - self

    def scale(self, c) -> "Expr":
        if not c:
            return Expr()
        return Expr({m: v * c for m, v in self.terms.items()})

    def mul_monomial(self, mono: Monomial, c=1) -> "Expr":
        return Expr({mono_mul(m, mono): v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Expr):
            if isinstance(other, (int, mpq)) or hasattr(other, "denominator"):
                return self.scale(mpq(other))
            other = as_expr(other)
        if not self.terms or not other.terms:
            return Expr()
        if len(other.terms) == 1:
            (mb, cb), = other.terms.items()
            return self.mul_monomial(mb, cb)
        if len(self.terms) == 1:
            (ma, ca), = self.terms.items()
            return other.mul_monomial(ma, ca)
        out: dict = {}
        get = out.get
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = mono_mul(ma, mb)
                v = get(m)
                out[m] = ca * cb if v is None else v + ca * cb
        return Expr({m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise NonPolynomialError(f"non-integer exponent {n!r}")
        if n < 0:
            if len(self.terms) != 1:
                raise NonPolynomialError(
                    f"negative power of a non-monomial expression: ({self})^{n}")
            (m, c), = self.terms.items()
            return Expr({mono_pow(m, n): mpq(1) / c ** (-n)})
        result = Expr.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __truediv__(self, other):
        other = as_expr(other)
        if other.is_const():
            c = other.const_value()
            if not c:
                raise ZeroDivisionError("division by zero")
            return self.scale(1 / c)
        return self * other ** -1

    def __rtruediv__(self, other):
        return as_expr(other) / self

    # structure --------------------------------------------------------
    def subs(self, mapping: Mapping) -> "Expr":
        """Substitute atoms (Sym/Deriv/Apply or Expr atoms) by expressions."""
        table = {}
        for k, v in mapping.items():
            if isinstance(k, Expr):
                (m, _), = k.terms.items()
                (aid, _), = m
            else:
                aid = k.id
            table[aid] = as_expr(v)
        if not table or not (self.atom_ids() & table.keys()):
            return self
        cache: dict = {}
        out = Expr()
        acc: dict = {}
        for m, c in self.terms.items():
            keep = []
            factor = None
            for aid, e in m:
                if aid in table:
                    p = cache.get((aid, e))
                    if p is None:
                        p = table[aid] ** e
                        cache[(aid, e)] = p
                    factor = p if factor is None else factor * p
                else:
                    keep.append((aid, e))
            if factor is None:
                acc[m] = acc.get(m, 0) + c
                continue
            term = factor.mul_monomial(tuple(keep), c)
            for mm, cc in term.terms.items():
                acc[mm] = acc.get(mm, 0) + cc
        out = Expr({m: c for m, c in acc.items() if c})
        return out

    def coeff_split(self, ids: set) -> dict:
        """Group terms by the part of each monomial over ``ids``.

        Returns ``{monomial_over_ids: Expr of the remaining factors}``.
        """
        groups: dict = {}
        for m, c in self.terms.items():
            inner = tuple(p for p in m if p[0] in ids)
            rest = tuple(p for p in m if p[0] not in ids)
            g = groups.setdefault(inner, {})
            g[rest] = g.get(rest, 0) + c
        return {k: Expr({m: c for m, c in g.items() if c}) for k, g in groups.items()
                if any(g.values())}

    def as_univariate(self, a) -> dict:
        """``{exponent: coefficient Expr}`` with respect to atom ``a``."""
        return {dict(k).get(a.id, 0): v for k, v in self.coeff_split({a.id}).items()}

    def content(self) -> mpq:
        """Positive rational gcd of the coefficients."""
        from math import gcd
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, int(c.numerator))
            den = den * int(c.denominator) // gcd(den, int(c.denominator))
        return mpq(num, den) if num else mpq(1)

    def primitive(self) -> "Expr":
        """Remove content and make the leading coefficient positive."""
        if not self.terms:
            return self
        c = self.content()
        lead = self.leading()[1]
        if lead < 0:
            c = -c
        return self.scale(1 / c)

    def evaluate(self, values: Mapping, exact: bool = True):
        """Numeric value given a mapping ``atom -> number`` for every atom."""
        vals = {}
        for k, v in values.items():
            aid = k.id if not isinstance(k, Expr) else next(iter(next(iter(k.terms))))[0]
            vals[aid] = v
        total = mpq(0) if exact else 0.0
        for m, c in self.terms.items():
            t = c if exact else float(c)
            for aid, e in m:
                t = t * vals[aid] ** e
            total = total + t
        return total

    # calculus ---------------------------------------------------------
    def diff(self, s: Sym) -> "Expr":
        return differentiate(self, s)

    # printing ---------------------------------------------------------
    def __str__(self):
        from .printing import to_text
        return to_text(self)

    def __repr__(self):
        return f"Expr({self})"

    def latex(self) -> str:
        from .printing import to_latex
        return to_latex(self)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (Sym, Deriv, Apply)):
        return Expr.atom(x)
    if isinstance(x, (int, mpq)) or (hasattr(x, "numerator") and not isinstance(x, float)):
        return Expr.const(mpq(x))
    raise TypeError(f"cannot convert {x!r} to Expr")


ZERO = Expr()
ONE = Expr.const(1)


# ---------------------------------------------------------------------------
# differentiation

def _apply_derivative(a: Apply) -> Expr:
    """d/dz f(z) expressed through applications at the same argument."""
    f = a.fn
    self_ = Expr.atom(a)
    same = lambda name: apply(name, a.arg, *a.params)
    if f == "tanh":
        return ONE - self_ ** 2
    if f == "tan":
        return ONE + self_ ** 2
    if f == "exp":
        return self_
    if f == "sinh":
        return same("cosh")
    if f == "cosh":
        return same("sinh")
    if f == "sin":
        return same("cos")
    if f == "cos":
        return -same("sin")
    if f in ("sn", "cn", "dn"):
        k = a.params[0]
        sn, cn, dn = same("sn"), same("cn"), same("dn")
        if f == "sn":
            return cn * dn
        if f == "cn":
            return -(sn * dn)
        return -(k * k * sn * cn)
    raise NonPolynomialError(f"no derivative rule for kernel {f!r}")


_atom_diff_cache: dict = {}


def _diff_atom(aid: int, s: Sym) -> Expr:
    key = (aid, s.id)
    hit = _atom_diff_cache.get(key)
    if hit is not None:
        return hit
    a = atom_by_id(aid)
    if isinstance(a, Sym):
        if a is s:
            out = ONE
        elif a.is_function:
            out = Expr.atom(deriv(a, {s: 1}))
        else:
            out = ZERO
    elif isinstance(a, Deriv):
        out = Expr.atom(deriv(a.fn, list(a.orders) + [(s, 1)]))
    else:
        inner = differentiate(a.arg, s)
        out = inner * _apply_derivative(a) if inner else ZERO
    _atom_diff_cache[key] = out
    return out


def differentiate(e: Expr, s: Sym) -> Expr:
    """Formal derivative.  Function symbols (dependent variables, kernels)
    produce derivative atoms; parameters are constants."""
    acc: dict = {}
    for m, c in e.terms.items():
        for idx, (aid, ex) in enumerate(m):
            d = _diff_atom(aid, s)
            if not d.terms:
                continue
            rest = m[:idx] + ((aid, ex - 1),) + m[idx + 1:] if ex != 1 else m[:idx] + m[idx + 1:]
            for dm, dc in d.terms.items():
                mm = mono_mul(rest, dm)
                acc[mm] = acc.get(mm, 0) + c * ex * dc
    return Expr({m: c for m, c in acc.items() if c})


# ---------------------------------------------------------------------------
# Laurent forms in kernel symbols


class LaurentForm:
    """Canonical decomposition of an expression in kernel symbols.

    Keys are ``(exponents, markers)`` where ``exponents`` is an integer tuple
    over the kernels and ``markers`` a tuple of 0/1 flags saying which
    first-derivative markers multiply the term.  Values are parameter
    polynomials.
    """

    __slots__ = ("kernels", "var", "terms")

    def __init__(self, kernels, var, terms):
        self.kernels = tuple(kernels)
        self.var = var
        self.terms = terms

    def __eq__(self, other):
        return (isinstance(other, LaurentForm) and self.kernels == other.kernels
                and self.terms == other.terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self) -> Iterator:
        return iter(sorted(self.terms.items(), key=lambda kv: (kv[0][1], tuple(-e for e in kv[0][0]))))

    def components(self) -> dict:
        """``{markers: {exponents: coeff}}``."""
        out: dict = {}
        for (ex, mk), c in self.terms.items():
            out.setdefault(mk, {})[ex] = c
        return out

    def to_expr(self) -> Expr:
        total = Expr()
        for (ex, mk), c in self.terms.items():
            mono = tuple(sorted(
                [(k.id, e) for k, e in zip(self.kernels, ex) if e]
                + [(marker(k, self.var).id, 1) for k, f in zip(self.kernels, mk) if f]))
            total = total + c.mul_monomial(mono)
        return total


def to_laurent(e: Expr, kernels, var: Sym | None = None) -> LaurentForm:
    kernels = tuple(kernels)
    kid = {k.id: i for i, k in enumerate(kernels)}
    mid = {}
    for i, k in enumerate(kernels):
        if var is not None:
            mid[marker(k, var).id] = i
    n = len(kernels)
    terms: dict = {}
    for m, c in e.terms.items():
        ex = [0] * n
        mk = [0] * n
        rest = []
        for aid, p in m:
            if aid in kid:
                ex[kid[aid]] = p
            elif aid in mid:
                if p != 1:
                    raise PreconditionError(
                        f"marker {atom_by_id(aid)!r} appears to power {p}; reduce markers first")
                mk[mid[aid]] = 1
            else:
                a = atom_by_id(aid)
                if isinstance(a, Deriv) and a.fn in kernels:
                    raise PreconditionError(f"unreduced derivative marker {a!r}")
                rest.append((aid, p))
        key = (tuple(ex), tuple(mk))
        g = terms.setdefault(key, {})
        r = tuple(rest)
        g[r] = g.get(r, 0) + c
    out = {}
    for key, g in terms.items():
        poly = Expr({m: c for m, c in g.items() if c})
        if poly:
            out[key] = poly
    return LaurentForm(kernels, var, out)
