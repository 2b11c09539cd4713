"""Exact verification of closed-form travelling-wave solutions.

A candidate ``u(t, x, ...)`` built from kernel applications such as
``tanh(phase)`` is substituted into the PDE; derivatives follow the chain
rule, hyperbolic functions are rewritten through ``exp``, trigonometric and
elliptic identities are reduced, and declared relations like ``s^2 = 13``
are applied.  The verdict is zero exactly when the canonical residual has no
terms.  A floating-point spot check (mpmath, numerical differentiation of
the candidate) is reported alongside as an independent diagnostic.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import mpmath

from .pdeparse import PdeSpec, parse_expr, parse_pde, parse_relation
from .symcore import (Apply, Deriv, Expr, LaurentForm, PreconditionError, Sym, SymKind,
                      apply, atom_by_id, differentiate, mpq, sym, to_laurent)

ZERO_TOL = 1e-9
NONZERO_TOL = 1e-6
SAMPLES = 32
POLE_GUARD = 1e-3

# generators after rewriting; sinh and cosh go through exp
_GENERATORS = ("tanh", "tan", "exp", "sin", "cos", "sn", "cn", "dn")
_ODD = {"tanh", "tan", "sinh", "sin", "sn"}
_EVEN = {"cosh", "cos", "cn", "dn"}


class VerifyError(ValueError):
    pass


@dataclass(frozen=True)
class Relation:
    """``symbol^n = value`` with a nonzero rational value."""

    symbol: Sym
    n: int
    value: mpq

    def __str__(self):
        return f"{self.symbol.name}^{self.n}={self.value}"

    def numeric(self, sign: int = 1):
        root = mpmath.root(mpmath.mpf(self.value.numerator) / self.value.denominator, self.n)
        return root * sign if self.n % 2 == 0 else root


def relation(text: str, symbols: dict) -> Relation:
    s, n, rhs = parse_relation(text, symbols)
    if not rhs.is_const() or rhs.is_zero():
        raise VerifyError(f"relation {text!r} needs a nonzero rational right-hand side")
    return Relation(s, n, rhs.const_value())


@dataclass(frozen=True)
class ClosedFormSolution:
    expression: Expr
    free: tuple = ()  # Syms treated as indeterminates
    relations: tuple = ()  # Relation
    side_conditions: tuple = ()  # Exprs assumed nonzero
    aux: str | None = None
    label: str = ""

    def applications(self) -> list:
        return sorted((a for a in self.expression.atoms() if isinstance(a, Apply)),
                      key=lambda a: a.id)

    def phases(self) -> list:
        seen, out = set(), []
        for a in self.applications():
            if a.arg not in seen:
                seen.add(a.arg)
                out.append(a.arg)
        return out

    def __str__(self):
        return str(self.expression)


def parse_solution(text: str, params=(), relations=(), aux=None, label="") -> ClosedFormSolution:
    table = {p: sym(p, SymKind.FREE) for p in params}
    e = parse_expr(text, table, allow_kernels=True)
    rels = tuple(relation(r, table) for r in relations)
    rel_syms = {r.symbol for r in rels}
    free = tuple(sorted((s for s in e.free_syms()
                         if s.kind != SymKind.INDEPENDENT and s not in rel_syms),
                        key=lambda s: s.id))
    return ClosedFormSolution(e, free, rels, (), aux, label)


@dataclass
class ResidualReport:
    verdict: str  # "zero" | "nonzero"
    residual: LaurentForm
    samples: list = field(default_factory=list)
    generators: tuple = ()

    @property
    def is_zero(self) -> bool:
        return self.verdict == "zero"

    def residual_expr(self) -> Expr:
        return _laurent_expr(self.residual)

    def max_sample(self) -> float:
        return max(self.samples, default=0.0)


def _laurent_expr(form: LaurentForm) -> Expr:
    total = Expr()
    for (ex, _), c in form.terms.items():
        mono = tuple(sorted((k.id, e) for k, e in zip(form.kernels, ex) if e))
        total = total + c.mul_monomial(mono)
    return total


# ---------------------------------------------------------------------------
# rewriting


def _check_phase(arg: Expr, independents) -> None:
    ind = {s.id for s in independents}
    for m in arg.terms:
        deg = sum(p for aid, p in m if aid in ind)
        if deg > 1 or any(p < 0 for aid, p in m if aid in ind):
            raise VerifyError(f"phase {arg} is not affine in the independent variables")
    for a in arg.atoms():
        if isinstance(a, (Apply, Deriv)):
            raise VerifyError(f"phase {arg} is not affine in the independent variables")


def _normalize_sign(a: Apply) -> tuple[int, Apply]:
    """Use odd/even symmetry so the phase has a positive leading coefficient."""
    if a.fn not in _ODD | _EVEN or not a.arg.terms or a.arg.leading()[1] > 0:
        return 1, a
    (m, _), = apply(a.fn, -a.arg, *a.params).terms.items()
    return (-1 if a.fn in _ODD else 1), atom_by_id(m[0][0])


def rewrite_generators(e: Expr, independents=()) -> Expr:
    """Express every kernel application through the generator set."""
    table = {}
    for a in e.atoms():
        if not isinstance(a, Apply):
            continue
        if a.fn not in _GENERATORS and a.fn not in ("sinh", "cosh"):
            raise VerifyError(f"unsupported kernel {a.fn!r}")
        _check_phase(a.arg, independents)
        sign, b = _normalize_sign(a)
        if b.fn in ("sinh", "cosh"):
            E = apply("exp", b.arg)
            r = (E + E ** -1 * (1 if b.fn == "cosh" else -1)) * mpq(1, 2)
        else:
            r = Expr.atom(b)
        table[a] = r if sign > 0 else -r
    return e.subs(table) if table else e


def _identity_for(a: Apply):
    """Replacement of ``a^2`` (None if ``a`` is not eliminable)."""
    if a.fn == "cos":
        s = apply("sin", a.arg)
        return Expr.const(1) - s ** 2
    if a.fn == "cn":
        s = apply("sn", a.arg, *a.params)
        return Expr.const(1) - s ** 2
    if a.fn == "dn":
        s = apply("sn", a.arg, *a.params)
        k = a.params[0]
        return Expr.const(1) - k * k * s ** 2
    return None


def _clear_generators(e: Expr, gens) -> Expr:
    low = {}
    gid = {g.id for g in gens}
    for m in e.terms:
        for aid, p in m:
            if aid in gid and p < low.get(aid, 0):
                low[aid] = p
    if not low:
        return e
    return e.mul_monomial(tuple(sorted((k, -v) for k, v in low.items())))


def reduce_identities(e: Expr) -> Expr:
    """Reduce cos, cn, dn to degree at most one (input must be polynomial in them)."""
    rules = {a.id: r for a in e.atoms() if isinstance(a, Apply)
             for r in [_identity_for(a)] if r is not None}
    if not rules:
        return e
    while True:
        acc: dict = {}
        changed = False
        for m, c in e.terms.items():
            hit = next(((aid, p) for aid, p in m if aid in rules and p >= 2), None)
            if hit is None:
                acc[m] = acc.get(m, 0) + c
                continue
            aid, p = hit
            rest = tuple((x, q - 2 if x == aid else q) for x, q in m if not (x == aid and q == 2))
            for mm, cc in rules[aid].mul_monomial(rest, c).terms.items():
                acc[mm] = acc.get(mm, 0) + cc
            changed = True
        e = Expr({m: c for m, c in acc.items() if c})
        if not changed:
            return e


def reduce_relations(e: Expr, relations) -> Expr:
    if not relations:
        return e
    rel = {r.symbol.id: r for r in relations}
    acc: dict = {}
    for m, c in e.terms.items():
        mono = []
        for aid, p in m:
            r = rel.get(aid)
            if r is None:
                mono.append((aid, p))
                continue
            q = p % r.n
            c = c * r.value ** ((p - q) // r.n)
            if q:
                mono.append((aid, q))
        key = tuple(mono)
        acc[key] = acc.get(key, 0) + c
    return Expr({m: c for m, c in acc.items() if c})


def _coefficient_relations(e: Expr, relations) -> Expr:
    """Relation symbols may also sit inside phases; reduce those too."""
    table = {}
    for a in e.atoms():
        if isinstance(a, Apply):
            arg = reduce_relations(a.arg, relations)
            if arg != a.arg:
                table[a] = apply(a.fn, arg, *a.params)
    return e.subs(table) if table else e


# ---------------------------------------------------------------------------
# exact verification


def _derivative_table(lhs: Expr, dependent: Sym, expr: Expr) -> dict:
    table = {dependent: expr}
    cache = {(): expr}
    for a in lhs.atoms():
        if isinstance(a, Deriv) and a.fn is dependent:
            seq = tuple(s for s, k in a.orders for _ in range(k))
            cur, path = expr, ()
            for s in seq:
                path = path + (s.id,)
                if path not in cache:
                    cache[path] = differentiate(cur, s)
                cur = cache[path]
            table[a] = cur
    return table


def residual_expr(sol: ClosedFormSolution, p: PdeSpec) -> tuple[Expr, tuple]:
    """Canonical residual of ``p.lhs`` at ``sol`` and the generator atoms."""
    expr = _coefficient_relations(sol.expression, sol.relations)
    expr = rewrite_generators(expr, p.independents)
    res = p.lhs.subs(_derivative_table(p.lhs, p.dependent, expr))
    gens = tuple(sorted((a for a in res.atoms() if isinstance(a, Apply)), key=lambda a: a.id))
    res = _clear_generators(res, gens)
    res = reduce_identities(res)
    res = reduce_relations(res, sol.relations)
    gens = tuple(sorted((a for a in res.atoms() if isinstance(a, Apply)), key=lambda a: a.id))
    return res, gens


def verify_solution(sol: ClosedFormSolution, p: PdeSpec, samples: int = SAMPLES,
                    seed: int = 0) -> ResidualReport:
    res, gens = residual_expr(sol, p)
    form = to_laurent(res, gens)
    verdict = "zero" if res.is_zero() else "nonzero"
    report = ResidualReport(verdict, form, [], gens)
    if samples:
        report.samples = spot_check(sol, p, samples, seed)
    return report


# ---------------------------------------------------------------------------
# numeric spot check

_MP = {"tanh": mpmath.tanh, "tan": mpmath.tan, "exp": mpmath.exp, "sinh": mpmath.sinh,
       "cosh": mpmath.cosh, "sin": mpmath.sin, "cos": mpmath.cos}


def _eval(e: Expr, env: dict, apps: dict | None = None):
    total = mpmath.mpf(0)
    for m, c in e.terms.items():
        t = mpmath.mpf(c.numerator) / c.denominator
        for aid, p in m:
            a = atom_by_id(aid)
            if isinstance(a, Apply):
                v = _eval_apply(a, env, apps)
            else:
                v = env[a]
            t *= v ** p
        total += t
    return total


def _eval_apply(a: Apply, env: dict, apps: dict | None):
    arg = _eval(a.arg, env)
    if a.fn in _MP:
        v = _MP[a.fn](arg)
    else:
        k = _eval(a.params[0], env)
        v = mpmath.ellipfun(a.fn, arg, m=k * k)
    if apps is not None:
        apps[a] = v
    return v


def _sample_params(sol: ClosedFormSolution, rng: random.Random) -> dict:
    env = {}
    for s in sol.free:
        mag = rng.uniform(0.3, 1.0)
        env[s] = mpmath.mpf(mag if rng.random() < 0.5 else -mag)
    for r in sol.relations:
        env[r.symbol] = r.numeric(rng.choice((1, -1)))
    return env


def spot_check(sol: ClosedFormSolution, p: PdeSpec, samples: int = SAMPLES,
               seed: int = 0) -> list:
    """|lhs| at random points in [-2, 2]^n using numerical derivatives of the
    candidate; points near generator zeros are rejected."""
    rng = random.Random(seed)
    out = []
    derivs = [a for a in p.lhs.atoms() if isinstance(a, Deriv) and a.fn is p.dependent]
    ind = list(p.independents)
    tries = 0
    with mpmath.workdps(40):
        while len(out) < samples and tries < samples * 50:
            tries += 1
            env = _sample_params(sol, rng)
            point = [mpmath.mpf(rng.uniform(-2, 2)) for _ in ind]
            env.update(zip(ind, point))
            apps: dict = {}
            try:
                _eval(sol.expression, env, apps)
            except (ZeroDivisionError, ValueError):
                continue
            if any(abs(v) < POLE_GUARD or abs(v) > 1e8 for v in apps.values()):
                continue
            base = {s: v for s, v in env.items() if s not in ind}

            def f(*xs):
                return _eval(sol.expression, {**base, **dict(zip(ind, xs))})

            table = {p.dependent: f(*point)}
            for a in derivs:
                orders = tuple(dict((s, k) for s, k in a.orders).get(s, 0) for s in ind)
                table[a] = mpmath.diff(f, tuple(point), orders)
            val = _eval(p.lhs, {**env, **table})
            out.append(float(abs(val)))
    return out


# ---------------------------------------------------------------------------
# fixtures and corpus


@dataclass(frozen=True)
class Fixture:
    id: str
    equation: str
    solution: str
    params: tuple = ()
    relations: tuple = ()
    expect: str = "zero"
    group: str = ""
    discrepancy: str = ""  # non-empty: documented, expected to fail

    @classmethod
    def from_json(cls, d: dict) -> "Fixture":
        return cls(d.get("id", ""), d["equation"], d["solution"], tuple(d.get("params", ())),
                   tuple(d.get("relations", ())), d.get("expect", "zero"), d.get("group", ""),
                   d.get("discrepancy", ""))

    def to_json(self) -> dict:
        d = {"id": self.id, "group": self.group, "equation": self.equation,
             "solution": self.solution, "params": list(self.params),
             "relations": list(self.relations), "expect": self.expect}
        if self.discrepancy:
            d["discrepancy"] = self.discrepancy
        return d

    def build(self) -> tuple[PdeSpec, ClosedFormSolution]:
        p = parse_pde(self.equation)
        sol = parse_solution(self.solution, self.params, self.relations, label=self.id)
        return p, sol


@dataclass
class FixtureResult:
    fixture: Fixture
    verdict: str
    residual: str
    max_sample: float
    seconds: float = 0.0
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict == self.fixture.expect

    @property
    def whitelisted(self) -> bool:
        return bool(self.fixture.discrepancy)

    def to_json(self) -> dict:
        return {"id": self.fixture.id, "group": self.fixture.group, "verdict": self.verdict,
                "expect": self.fixture.expect, "ok": self.ok, "residual": self.residual,
                "max_sample": self.max_sample, "discrepancy": self.fixture.discrepancy,
                "error": self.error}


@dataclass
class CorpusSummary:
    results: list

    def __len__(self):
        return len(self.results)

    @property
    def failures(self) -> list:
        return [r for r in self.results if not r.ok]

    @property
    def unexpected_failures(self) -> list:
        return [r for r in self.failures if not r.whitelisted]

    @property
    def exit_status(self) -> int:
        return 1 if self.unexpected_failures else 0

    def fraction_zero(self) -> float:
        if not self.results:
            return 1.0
        return sum(r.verdict == "zero" for r in self.results) / len(self.results)

    def to_json(self) -> dict:
        return {"total": len(self.results),
                "zero": sum(r.verdict == "zero" for r in self.results),
                "failures": [r.fixture.id for r in self.failures],
                "results": [r.to_json() for r in self.results]}


def _run_fixture(fx: Fixture, samples: int = SAMPLES) -> FixtureResult:
    import time
    t0 = time.perf_counter()
    try:
        p, sol = fx.build()
        rep = verify_solution(sol, p, samples=samples)
    except (VerifyError, PreconditionError, ValueError) as exc:
        return FixtureResult(fx, "error", "", 0.0, time.perf_counter() - t0, str(exc))
    return FixtureResult(fx, rep.verdict, str(rep.residual_expr()), rep.max_sample(),
                         time.perf_counter() - t0)


def verify_corpus(fixtures, workers: int | None = None, samples: int = SAMPLES) -> CorpusSummary:
    fixtures = list(fixtures)
    if workers and workers > 1 and len(fixtures) > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_run_fixture, fixtures, [samples] * len(fixtures)))
    else:
        results = [_run_fixture(f, samples) for f in fixtures]
    return CorpusSummary(results)


def load_fixtures(path) -> list:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = data.get("fixtures", [data])
    return [Fixture.from_json(d) for d in data]


def bundled_corpus() -> list:
    text = resources.files("fexpand").joinpath("data/corpus.json").read_text()
    data = json.loads(text)
    return [Fixture.from_json(d) for d in data["fixtures"]]
