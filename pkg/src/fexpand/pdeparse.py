"""Recursive-descent parser for polynomial PDEs and closed-form solutions.

Grammar (whitespace insignificant)::

    equation := expr "=" "0"
    expr     := ["-"] term (("+" | "-") term)*
    term     := factor (("*" | "/") factor)*
    factor   := base ("^" ["-"] integer | "^" "(" "-" integer ")")?
    base     := integer | ident | deriv | call | "(" expr ")"
    deriv    := ident "_" letters | "D[" ident ("," ident)+ "]"
    call     := kernel "(" expr ("," expr)? ")"

Division is accepted only by monomials (constants, symbols, kernel calls),
so every parsed value is a Laurent polynomial.  Kernel calls are rejected in
equations and accepted in solution expressions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .symcore import (Expr, NonPolynomialError, Sym, SymKind, apply, as_expr,
                      deriv, sym)
from .printing import to_text, to_latex

KERNEL_FUNCS = ("tanh", "tan", "exp", "sinh", "cosh", "sin", "cos", "sn", "cn", "dn")
# coordinate names that are always treated as independent variables
COORDINATES = ("t", "x", "y", "z")


class InputError(ValueError):
    """Any rejected user input (exit code 2 at the CLI)."""


class GrammarError(InputError):
    def __init__(self, message: str, position: int, expected: str | None = None):
        self.position = position
        self.expected = expected
        detail = f" (expected {expected})" if expected else ""
        super().__init__(f"syntax error at position {position}: {message}{detail}")


class UnsupportedEquation(InputError):
    pass


class NonAutonomous(InputError):
    pass


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+)
  | (?P<dopen>D\[)
  | (?P<ident>[a-zA-Z][a-zA-Z0-9]*(?:_[a-zA-Z]+)?)
  | (?P<op>[-+*/^()=,\]])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    out = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise GrammarError(f"unexpected character {text[i]!r}", i)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), i))
        i = m.end()
    out.append(Token("end", "", len(text)))
    return out


@dataclass
class Scope:
    """Symbol resolution rules for one parse."""

    dependent: str | None = "u"
    params: tuple = ()
    allow_kernels: bool = False
    extra: dict = field(default_factory=dict)  # name -> Sym for solution mode
    independents: set = field(default_factory=set)
    explicit_vars: list = field(default_factory=list)


class _Parser:
    def __init__(self, text: str, scope: Scope):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.scope = scope

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def take(self, text: str | None = None, kind: str | None = None) -> Token:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text is not None else kind
            got = repr(t.text) if t.text else "end of input"
            raise GrammarError(f"found {got}", t.pos, want)
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    # grammar ---------------------------------------------------------
    def equation(self) -> Expr:
        e = self.expr()
        self.take("=")
        z = self.take(kind="num")
        if z.text != "0":
            raise GrammarError(f"found {z.text!r}", z.pos, "'0'")
        self.take(kind="end")
        return e

    def expression(self) -> Expr:
        e = self.expr()
        self.take(kind="end")
        return e

    def expr(self) -> Expr:
        neg = False
        if self.at("-"):
            self.i += 1
            neg = True
        elif self.at("+"):
            self.i += 1
        total = self.term()
        if neg:
            total = -total
        while self.at("+") or self.at("-"):
            op = self.take().text
            t = self.term()
            total = total + t if op == "+" else total - t
        return total

    def term(self) -> Expr:
        acc = self.factor()
        while self.at("*") or self.at("/"):
            op = self.take()
            f = self.factor()
            if op.text == "*":
                acc = acc * f
            else:
                if f.is_zero():
                    raise UnsupportedEquation(f"division by zero at position {op.pos}")
                if not f.is_monomial():
                    raise UnsupportedEquation(
                        f"division by a non-monomial expression at position {op.pos}")
                acc = acc / f
        return acc

    def factor(self) -> Expr:
        base = self.base()
        if self.at("^"):
            caret = self.take()
            if self.at("("):
                self.take("(")
                n = self._signed_int()
                self.take(")")
            else:
                n = self._signed_int()
            if n < 0 and not base.is_monomial():
                raise UnsupportedEquation(
                    f"negative power of a non-monomial expression at position {caret.pos}")
            return base ** n
        return base

    def _signed_int(self) -> int:
        sign = 1
        if self.at("-"):
            self.i += 1
            sign = -1
        t = self.tok
        if t.kind != "num":
            if t.kind == "op" and t.text == "/":
                raise UnsupportedEquation(f"rational exponent at position {t.pos}")
            raise GrammarError(f"found {t.text!r}" if t.text else "found end of input",
                               t.pos, "integer exponent")
        self.i += 1
        if self.at("/"):
            raise UnsupportedEquation(f"rational exponent at position {self.tok.pos}")
        return sign * int(t.text)

    def base(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Expr.const(int(t.text))
        if t.kind == "op" and t.text == "(":
            self.i += 1
            e = self.expr()
            self.take(")")
            return e
        if t.kind == "dopen":
            self.i += 1
            fn = self.take(kind="ident")
            names = []
            while self.at(","):
                self.i += 1
                names.append(self.take(kind="ident"))
            if not names:
                raise GrammarError("derivative without variables", self.tok.pos, "','")
            self.take("]")
            return self._derivative(fn.text, [n.text for n in names], fn.pos)
        if t.kind == "ident":
            self.i += 1
            if "_" in t.text:
                name, letters = t.text.split("_", 1)
                return self._derivative(name, list(letters), t.pos)
            if self.at("("):
                return self._call(t)
            return self._identifier(t)
        got = repr(t.text) if t.text else "end of input"
        raise GrammarError(f"found {got}", t.pos, "number, identifier or '('")

    # resolution ------------------------------------------------------
    def _call(self, t: Token) -> Expr:
        if t.text not in KERNEL_FUNCS:
            raise UnsupportedEquation(f"unsupported function {t.text!r} at position {t.pos}")
        if not self.scope.allow_kernels:
            raise UnsupportedEquation(
                f"non-polynomial construct {t.text}(...) at position {t.pos}")
        self.take("(")
        args = [self.expr()]
        while self.at(","):
            self.i += 1
            args.append(self.expr())
        self.take(")")
        want = 2 if t.text in ("sn", "cn", "dn") else 1
        if len(args) != want:
            raise GrammarError(f"{t.text} takes {want} argument(s)", t.pos)
        return apply(t.text, *args)

    def _derivative(self, name: str, letters: list[str], pos: int) -> Expr:
        sc = self.scope
        if name != sc.dependent:
            raise GrammarError(f"derivative of unknown function {name!r}", pos,
                               f"dependent variable {sc.dependent!r}")
        u = sym(name, SymKind.DEPENDENT)
        counts: dict = {}
        for v in letters:
            if v in sc.params:
                raise GrammarError(f"parameter {v!r} used as a derivative variable", pos)
            s = sym(v, SymKind.INDEPENDENT)
            sc.independents.add(s)
            counts[s] = counts.get(s, 0) + 1
        return Expr.atom(deriv(u, counts))

    def _identifier(self, t: Token) -> Expr:
        sc = self.scope
        name = t.text
        if name == sc.dependent:
            return Expr.atom(sym(name, SymKind.DEPENDENT))
        if name in sc.params:
            return Expr.atom(sym(name, SymKind.FREE))
        if name in sc.extra:
            return Expr.atom(sc.extra[name])
        if name in COORDINATES or any(s.name == name for s in sc.independents):
            s = sym(name, SymKind.INDEPENDENT)
            sc.explicit_vars.append((s, t.pos))
            return Expr.atom(s)
        raise GrammarError(f"undeclared identifier {name!r}", t.pos, "a declared parameter")


# ---------------------------------------------------------------------------
# PDE specs


@dataclass(frozen=True)
class PdeSpec:
    dependent: Sym
    independents: tuple
    lhs: Expr
    params: tuple = ()

    def __str__(self):
        return print_pde(self)


def order_independents(syms) -> tuple:
    """t first, then the rest alphabetically."""
    return tuple(sorted(syms, key=lambda s: (s.name != "t", s.name)))


def parse_pde(text: str, params=(), dependent: str = "u") -> PdeSpec:
    """Parse ``expr = 0`` into a validated polynomial autonomous PDE."""
    params = tuple(params)
    for p in params:
        if not re.fullmatch(r"[a-zA-Z][a-zA-Z0-9]*", p):
            raise InputError(f"invalid parameter name {p!r}")
        if p == dependent or p in COORDINATES:
            raise InputError(f"parameter name {p!r} clashes with a variable")
    scope = Scope(dependent=dependent, params=params)
    lhs = _Parser(text, scope).equation()
    indep = set(scope.independents)
    for s, pos in scope.explicit_vars:
        if s.name in (x.name for x in indep) or s.name in COORDINATES:
            raise NonAutonomous(
                f"explicit occurrence of independent variable {s.name!r} at position {pos}")
    if not indep:
        raise UnsupportedEquation("equation contains no derivative")
    if lhs.is_zero():
        raise UnsupportedEquation("equation is identically zero")
    lhs_atoms = lhs.atoms()
    if not any(getattr(a, "fn", None) is not None and a.fn.name == dependent for a in lhs_atoms):
        raise UnsupportedEquation("equation contains no derivative")
    for m in lhs.terms:
        if any(e < 0 for _, e in m):
            raise UnsupportedEquation("equation is not polynomial (negative power)")
    used = {s.name for s in lhs.free_syms()}
    return PdeSpec(sym(dependent, SymKind.DEPENDENT), order_independents(indep), lhs,
                   tuple(sym(p) for p in params if p in used))


def print_pde(p: PdeSpec, style: str = "ascii") -> str:
    if style == "latex":
        return to_latex(p.lhs).replace(" ", "") + "=0"
    return to_text(p.lhs) + " = 0"


def parse_expr(text: str, symbols: dict, dependent: str | None = None,
               allow_kernels: bool = True) -> Expr:
    """Parse a closed-form expression over the given name -> Sym table.

    Coordinates (t, x, ...) are allowed and resolve to independent symbols.
    """
    scope = Scope(dependent=dependent, params=(), allow_kernels=allow_kernels,
                  extra=dict(symbols))
    return _Parser(text, scope).expression()


def parse_relation(text: str, symbols: dict) -> tuple[Sym, int, Expr]:
    """Parse ``name^n = rhs`` into ``(sym, n, rhs)``."""
    if "=" not in text:
        raise InputError(f"relation {text!r} lacks '='")
    left, right = text.split("=", 1)
    m = re.fullmatch(r"\s*([a-zA-Z][a-zA-Z0-9]*)\s*\^\s*(\d+)\s*", left)
    if not m:
        raise InputError(f"relation {text!r} must have the form name^n = value")
    name, n = m.group(1), int(m.group(2))
    s = symbols.get(name) or sym(name, SymKind.FREE)
    rhs = parse_expr(right, {k: v for k, v in symbols.items() if k != name},
                     allow_kernels=False)
    if n < 2:
        raise InputError(f"relation {text!r} must have exponent at least 2")
    return s, n, as_expr(rhs)


__all__ = [
    "InputError", "GrammarError", "UnsupportedEquation", "NonAutonomous",
    "PdeSpec", "parse_pde", "print_pde", "parse_expr", "parse_relation",
    "KERNEL_FUNCS", "NonPolynomialError",
]
