"""Registry of auxiliary kernel systems and the derivative calculus they induce.

A kernel with an explicit rule ``F' = R`` never leaves a derivative marker:
``D(F)`` is replaced by ``R``.  A kernel with a quadratic rule
``(F')^2 = R`` keeps a first-order marker ``M = D(F)`` with ``M^2 -> R`` and
``D(M) = R_F / 2``.  Identities ``E^2 = P`` designate an eliminable kernel
``E`` that is kept at power at most one in canonical forms.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction

from .symcore import (ONE, Deriv, Expr, Sym, SymKind, as_expr, atom_by_id, deriv,
                      differentiate, marker, mono_mul, mpq, sym)


class AuxError(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    kind: str  # "explicit" | "quadratic"
    rhs: Expr


@dataclass(frozen=True)
class Identity:
    """``kernel^2 = replacement`` with ``kernel`` eliminable."""

    kernel: Sym
    replacement: Expr

    def relation(self) -> Expr:
        return Expr.atom(self.kernel) ** 2 - self.replacement


@dataclass(frozen=True)
class Realization:
    """Closed-form realization: kernel i is ``funcs[i](xi)`` (None if none)."""

    funcs: tuple
    modulus: Expr | None = None


@dataclass(eq=False)
class AuxSystem:
    name: str
    kernels: tuple
    rules: tuple
    var: Sym
    identities: tuple = ()
    params: dict = field(default_factory=dict)
    realization: Realization | None = None
    side_conditions: tuple = ()
    _memo: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if len(self.kernels) != len(self.rules):
            raise AuxError("one rule per kernel is required")
        self._kid = {k.id: i for i, k in enumerate(self.kernels)}
        self._marker = tuple(marker(k, self.var) for k in self.kernels)
        self._mid = {m.id: i for i, m in enumerate(self._marker)}
        self._elim = {idt.kernel.id: idt.replacement for idt in self.identities}

    # ------------------------------------------------------------------
    @property
    def arity(self) -> int:
        return len(self.kernels)

    def marker(self, i: int) -> Deriv:
        return self._marker[i]

    def is_quadratic(self, i: int) -> bool:
        return self.rules[i].kind == "quadratic"

    def first_derivative(self, i: int) -> Expr:
        """D(kernel_i) in the marker basis."""
        if self.is_quadratic(i):
            return Expr.atom(self._marker[i])
        return self.rules[i].rhs

    def marker_derivative(self, i: int) -> Expr:
        """D(M_i) for a quadratic kernel: half the kernel-derivative of R."""
        key = ("dm", i)
        hit = self._memo.get(key)
        if hit is None:
            hit = self.dxi(self.rules[i].rhs).scale(mpq(1, 2))
            # D(R) = R_F * M, so dividing by M is dividing by the marker factor
            hit = _strip_marker(hit, self._marker[i])
            with self._lock:
                self._memo[key] = hit
        return hit

    def kernel_expr(self, i: int) -> Expr:
        return Expr.atom(self.kernels[i])

    # ------------------------------------------------------------------
    def dxi(self, e: Expr) -> Expr:
        """Derivative with respect to the wave variable, in the marker basis
        (marker powers reduced, identities not applied)."""
        acc: dict = {}
        for m, c in e.terms.items():
            for idx, (aid, ex) in enumerate(m):
                i = self._kid.get(aid)
                if i is not None:
                    d = self.first_derivative(i)
                else:
                    j = self._mid.get(aid)
                    if j is None:
                        a = atom_by_id(aid)
                        if isinstance(a, Deriv) and a.fn in self.kernels:
                            raise AuxError(f"unreduced marker {a!r} in dxi input")
                        continue
                    d = self.marker_derivative(j)
                rest = m[:idx] + ((aid, ex - 1),) + m[idx + 1:] if ex != 1 else m[:idx] + m[idx + 1:]
                for dm, dc in d.terms.items():
                    mm = mono_mul(rest, dm)
                    acc[mm] = acc.get(mm, 0) + c * ex * dc
        return self.reduce_markers(Expr({m: c for m, c in acc.items() if c}))

    def reduce_markers(self, e: Expr) -> Expr:
        """Reduce quadratic-kernel marker powers mod 2 via M^2 -> R."""
        if not any(self.is_quadratic(i) for i in range(self.arity)):
            return e
        keep: dict = {}
        out = Expr()
        changed = False
        for m, c in e.terms.items():
            hit = [(aid, ex) for aid, ex in m if aid in self._mid and ex >= 2]
            if any(aid in self._mid and ex < 0 for aid, ex in m):
                raise AuxError("negative marker power")
            if not hit:
                keep[m] = c
                continue
            changed = True
            term = Expr({tuple(p for p in m if p not in hit): c})
            for aid, ex in hit:
                j = self._mid[aid]
                term = term * self.rules[j].rhs ** (ex // 2)
                if ex % 2:
                    term = term * Expr.atom(self._marker[j])
            out = out + term
        if not changed:
            return e
        return self.reduce_markers(out + Expr(keep))

    def D(self, i: int, k: int) -> Expr:
        """D^k(kernel_i) in the marker basis (memoized)."""
        key = ("D", i, k)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if k == 0:
            hit = self.kernel_expr(i)
        elif k == 1:
            hit = self.first_derivative(i)
        else:
            hit = self.dxi(self.D(i, k - 1))
        with self._lock:
            self._memo[key] = hit
        return hit

    def apply_identities(self, e: Expr) -> Expr:
        """Keep eliminable kernels at power <= 1 (nonnegative powers only)."""
        if not self._elim:
            return e
        acc: dict = {}
        cache: dict = {}
        dirty = False
        for m, c in e.terms.items():
            hit = [(aid, ex) for aid, ex in m if aid in self._elim and ex >= 2]
            if not hit:
                acc[m] = acc.get(m, 0) + c
                continue
            dirty = True
            keep = tuple((aid, ex) if aid not in dict(hit) else (aid, ex % 2) for aid, ex in m)
            keep = tuple(p for p in keep if p[1])
            term = Expr({keep: c})
            for aid, ex in hit:
                key = (aid, ex // 2)
                p = cache.get(key)
                if p is None:
                    p = self._elim[aid] ** (ex // 2)
                    cache[key] = p
                term = term * p
            for mm, cc in term.terms.items():
                acc[mm] = acc.get(mm, 0) + cc
        out = Expr({m: c for m, c in acc.items() if c})
        return self.apply_identities(out) if dirty else out

    def clearing_monomial(self, e: Expr) -> tuple:
        """Exponent vector T making every kernel exponent of ``T*e`` nonnegative."""
        low = [0] * self.arity
        for m in e.terms:
            for aid, ex in m:
                i = self._kid.get(aid)
                if i is not None and ex < low[i]:
                    low[i] = ex
        return tuple(-x for x in low)

    def times_kernels(self, e: Expr, exps) -> Expr:
        mono = tuple(sorted((k.id, x) for k, x in zip(self.kernels, exps) if x))
        return e.mul_monomial(mono) if mono else e

    def canonical(self, e: Expr) -> tuple[Expr, tuple]:
        """(T*e reduced modulo markers and identities, T)."""
        e = self.reduce_markers(e)
        t = self.clearing_monomial(e)
        return self.apply_identities(self.times_kernels(e, t)), t

    def reduce_marker(self, e: Expr) -> Expr:
        """Rewrite every D^k(kernel) atom of ``e`` in the marker basis."""
        table = {}
        for a in e.atoms():
            if isinstance(a, Deriv) and a.fn in self.kernels:
                if len(a.orders) != 1 or a.orders[0][0] is not self.var:
                    raise AuxError(f"marker {a!r} is not a derivative in {self.var}")
                i = self.kernels.index(a.fn)
                k = a.orders[0][1]
                if k == 1 and self.is_quadratic(i):
                    continue
                table[a] = self.D(i, k)
        out = e.subs(table) if table else e
        out = self.reduce_markers(out)
        return self.apply_identities(out) if self._elim and _nonneg(out, self._elim) else out

    def markers(self) -> tuple:
        return self._marker


def _nonneg(e: Expr, ids) -> bool:
    return all(ex >= 0 for m in e.terms for aid, ex in m if aid in ids)


def _strip_marker(e: Expr, mk: Deriv) -> Expr:
    out = {}
    for m, c in e.terms.items():
        d = dict(m)
        if d.get(mk.id, 0) < 1:
            raise AuxError("derivative of a quadratic rule is not divisible by its marker")
        d[mk.id] -= 1
        out[tuple(sorted((k, v) for k, v in d.items() if v))] = c
    return Expr(out)


# ---------------------------------------------------------------------------
# builtins

BUILTIN_NAMES = ("tanh", "tan", "exp", "gprime-over-g", "sinh-cosh", "sin-cos",
                 "hprime-invh", "riccati", "jacobi-sn-cn-dn")

PARAMS = {
    "tanh": (), "tan": (), "exp": (), "sinh-cosh": (), "sin-cos": (),
    "gprime-over-g": ("alpha", "beta"),
    "hprime-invh": ("lambda", "mu"),
    "riccati": ("alpha", "beta", "mu"),
    "jacobi-sn-cn-dn": ("k",),
}

KERNEL_NAMES = ("F", "G", "H")


def _kernels(n: int) -> tuple:
    return tuple(sym(KERNEL_NAMES[i], SymKind.KERNEL) for i in range(n))


def _param_value(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, str):
        return Expr.const(mpq(Fraction(v)))
    if isinstance(v, float):
        raise AuxError("aux parameters must be exact (use a rational like 1/2)")
    return as_expr(v)


def builtin(name: str, params: dict | None = None, var: Sym | None = None) -> AuxSystem:
    """Construct a registry entry.  ``params`` maps parameter names to exact values."""
    if name not in BUILTIN_NAMES:
        raise AuxError(f"unknown aux system {name!r}; known: {', '.join(BUILTIN_NAMES)}")
    params = {str(k): _param_value(v) for k, v in (params or {}).items()}
    wanted = PARAMS[name]
    for p in params:
        if p not in wanted:
            raise AuxError(f"aux {name!r} has no parameter {p!r}")
    missing = [p for p in wanted if p not in params]
    if missing:
        raise AuxError(f"aux {name!r} is missing parameter(s): {', '.join(missing)}")
    var = var if var is not None else sym("xi", SymKind.INDEPENDENT)
    P = params
    if name == "tanh":
        (F,) = ks = _kernels(1)
        f = Expr.atom(F)
        return AuxSystem(name, ks, (Rule("explicit", ONE - f ** 2),), var,
                         realization=Realization(("tanh",)))
    if name == "tan":
        (F,) = ks = _kernels(1)
        f = Expr.atom(F)
        return AuxSystem(name, ks, (Rule("explicit", ONE + f ** 2),), var,
                         realization=Realization(("tan",)))
    if name == "exp":
        (F,) = ks = _kernels(1)
        return AuxSystem(name, ks, (Rule("explicit", Expr.atom(F)),), var,
                         realization=Realization(("exp",)))
    if name == "gprime-over-g":
        (F,) = ks = _kernels(1)
        f = Expr.atom(F)
        rhs = P["beta"] + P["alpha"] * f - f ** 2
        return AuxSystem(name, ks, (Rule("explicit", rhs),), var, params=P)
    if name == "sinh-cosh":
        ks = _kernels(2)
        f, g = (Expr.atom(k) for k in ks)
        # F = sinh, G = cosh; sinh^2 = cosh^2 - 1
        return AuxSystem(name, ks, (Rule("explicit", g), Rule("explicit", f)), var,
                         identities=(Identity(ks[0], g ** 2 - ONE),),
                         realization=Realization(("sinh", "cosh")))
    if name == "sin-cos":
        ks = _kernels(2)
        f, g = (Expr.atom(k) for k in ks)
        # F = sin, G = cos; cos^2 = 1 - sin^2
        return AuxSystem(name, ks, (Rule("explicit", g), Rule("explicit", -f)), var,
                         identities=(Identity(ks[1], ONE - f ** 2),),
                         realization=Realization(("sin", "cos")))
    if name == "hprime-invh":
        ks = _kernels(2)
        f, g = (Expr.atom(k) for k in ks)
        rules = (Rule("explicit", -P["lambda"] + P["mu"] * g - f ** 2),
                 Rule("explicit", -(f * g)))
        return AuxSystem(name, ks, rules, var, params=P)
    if name == "riccati":
        for p in ("alpha", "beta", "mu"):
            if P[p].is_zero():
                raise AuxError(f"riccati parameter {p} must be nonzero")
        ks = _kernels(2)
        f, g = (Expr.atom(k) for k in ks)
        rules = (Rule("explicit", P["alpha"] * f * g),
                 Rule("explicit", P["mu"] + P["alpha"] ** 2 * g ** 2 - P["beta"] * f))
        return AuxSystem(name, ks, rules, var, params=P)
    # jacobi-sn-cn-dn
    k = P["k"]
    if k.is_zero():
        raise AuxError("elliptic modulus must be nonzero")
    ks = _kernels(3)
    sn, cn, dn = (Expr.atom(x) for x in ks)
    rules = (Rule("explicit", cn * dn), Rule("explicit", -(sn * dn)),
             Rule("explicit", -(k * k * sn * cn)))
    idents = (Identity(ks[1], ONE - sn ** 2), Identity(ks[2], ONE - k * k * sn ** 2))
    return AuxSystem(name, ks, rules, var, identities=idents, params=P,
                     realization=Realization(("sn", "cn", "dn"), modulus=k))


def quadratic_single(rhs_of_F, name: str = "quadratic", var: Sym | None = None,
                     realization: Realization | None = None) -> AuxSystem:
    """Single-kernel system with the quadratic rule ``(F')^2 = R(F)``.

    ``rhs_of_F`` receives the kernel expression and returns ``R``.
    """
    var = var if var is not None else sym("xi", SymKind.INDEPENDENT)
    (F,) = ks = _kernels(1)
    return AuxSystem(name, ks, (Rule("quadratic", as_expr(rhs_of_F(Expr.atom(F)))),), var,
                     realization=realization)


def jacobi_sn_quadratic(k, var: Sym | None = None) -> AuxSystem:
    """sn alone under ``(w')^2 = (1 - w^2)(1 - k^2 w^2)``."""
    k = _param_value(k)
    return quadratic_single(lambda w: (ONE - w ** 2) * (ONE - k * k * w ** 2),
                            name="jacobi-sn-quadratic", var=var,
                            realization=Realization(("sn",), modulus=k))


def definition_residuals(name: str, params: dict) -> list[Expr]:
    """Check derived first-order rules against their defining linear ODE.

    gprime-over-g: F = P/G with G' = P, P' = alpha*P + beta*G.
    hprime-invh: F = P/H, G = 1/H with H' = P, P' = mu - lambda*H.
    Returns the residuals ``D(kernel) - rule`` evaluated on the definitions.
    """
    aux = builtin(name, params)
    xi = aux.var
    base, slope = sym("Hbase", SymKind.KERNEL), sym("Hslope", SymKind.KERNEL)
    h, p = Expr.atom(base), Expr.atom(slope)
    P = aux.params
    if name == "gprime-over-g":
        lin = AuxSystem("linear", (base, slope),
                        (Rule("explicit", p), Rule("explicit", P["alpha"] * p + P["beta"] * h)), xi)
        images = [p / h]
    elif name == "hprime-invh":
        lin = AuxSystem("linear", (base, slope),
                        (Rule("explicit", p), Rule("explicit", P["mu"] - P["lambda"] * h)), xi)
        images = [p / h, ONE / h]
    else:
        raise AuxError(f"{name!r} has no defining linear ODE")
    table = {k: img for k, img in zip(aux.kernels, images)}
    out = []
    for i, img in enumerate(images):
        out.append(lin.dxi(img) - aux.rules[i].rhs.subs(table))
    return out


def parse_aux_spec(text: str) -> tuple[str, dict]:
    """``NAME[:k=v,...]`` -> (name, {k: v})."""
    name, _, rest = text.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            if "=" not in item:
                raise AuxError(f"malformed aux parameter {item!r}")
            k, v = item.split("=", 1)
            try:
                params[k.strip()] = mpq(Fraction(v.strip()))
            except (ValueError, ZeroDivisionError):
                raise AuxError(f"aux parameter {k.strip()} must be a rational, got {v!r}")
    return name.strip(), params


def identity_derivatives(aux: AuxSystem) -> list[Expr]:
    """Each identity differentiated along the rules; all must vanish."""
    out = []
    for idt in aux.identities:
        d = aux.dxi(idt.relation())
        out.append(aux.apply_identities(d))
    return out


def rule_consistency(aux: AuxSystem) -> list[Expr]:
    """Residuals that must be zero for a well-formed registry entry.

    Identities must be preserved by the flow; quadratic rules must satisfy
    ``D(M^2) = D(R)``.
    """
    res = identity_derivatives(aux)
    for i in range(aux.arity):
        if aux.is_quadratic(i):
            m = Expr.atom(aux.marker(i))
            lhs = (m * aux.marker_derivative(i)).scale(2)
            rhs = aux.dxi(aux.rules[i].rhs)
            res.append(aux.reduce_markers(lhs - rhs))
    return res


__all__ = ["AuxSystem", "AuxError", "Rule", "Identity", "Realization", "builtin",
           "BUILTIN_NAMES", "quadratic_single", "jacobi_sn_quadratic", "parse_aux_spec",
           "rule_consistency", "identity_derivatives", "definition_residuals", "deriv", "differentiate"]
