"""End-to-end derivation: reduce, balance, collect, solve, assemble."""

from __future__ import annotations

from dataclasses import dataclass, field

from .algsolve import Budget, SolutionFamily, SolveResult, mirror_pairs, solve_system
from .ansatz import AnsatzShape, BalanceResult, Compression, balance, build, compress
from .auxreg import AuxSystem, builtin, parse_aux_spec
from .collect import AlgSystem, system_for
from .pdeparse import PdeSpec, parse_pde
from .reduce import OdeSpec, WaveSub, reduce_pde
from .symcore import Expr, Sym, _apply_derivative, apply, atom_by_id
from .verify import ClosedFormSolution


@dataclass(frozen=True)
class DeriveConfig:
    equation: str
    params: tuple = ()
    aux: str = "tanh"
    arity: int | None = None
    orders: AnsatzShape | None = None  # overrides balancing
    max_order: int = 12
    budget: Budget = field(default_factory=Budget)


@dataclass
class Family:
    """A solution family in full-ansatz coordinates with its assembled u."""

    family: SolutionFamily
    solution: ClosedFormSolution
    phase: Expr

    @property
    def assignment(self) -> tuple:
        return self.family.assignment

    @property
    def free(self) -> tuple:
        return self.family.free

    def to_json(self) -> dict:
        f = self.family
        return {
            "assignment": {s.name: str(v) for s, v in f.assignment},
            "free": [s.name for s in f.free],
            "side_conditions": [str(c) for c in f.side_conditions],
            "phase": str(self.phase),
            "solution": None if self.solution is None else str(self.solution.expression),
            "params": [] if self.solution is None else [s.name for s in self.solution.free],
            "provenance": list(f.provenance),
        }


@dataclass
class Derivation:
    pde: PdeSpec
    ode: OdeSpec
    wave: WaveSub
    aux: AuxSystem
    shape: AnsatzShape
    balanced: BalanceResult | None
    compression: Compression
    system: AlgSystem  # reduced ansatz
    result: SolveResult
    families: list  # Family

    @property
    def complete(self) -> bool:
        return self.result.complete

    def mirror_pairs(self) -> list:
        # compared in reduced coordinates, where dropped coefficients do not
        # shift the values (families keep the same order after lifting)
        return mirror_pairs(self.result.families)


def make_aux(spec: str) -> AuxSystem:
    name, params = parse_aux_spec(spec)
    return builtin(name, params)


def lift_family(fam: SolutionFamily, comp: Compression, full: AlgSystem | None = None) -> SolutionFamily:
    """Express a reduced-ansatz family in the full ansatz coordinates."""
    assign = comp.lift(dict(fam.assignment), fam.free)
    free = (set(fam.free) | set(comp.dropped)) - set(assign)
    out = SolutionFamily(tuple(sorted(assign.items(), key=lambda kv: kv[0].id)),
                         tuple(sorted(free, key=lambda s: s.id)), fam.side_conditions,
                         fam.provenance)
    if full is not None:
        table = dict(out.assignment)
        for e in full.equations:
            if not e.subs(table).is_zero():
                raise AssertionError("lifted family does not satisfy the full system")
    return out


def assemble(fam: SolutionFamily, inst, wave: WaveSub, independents, redundant=()) -> Family:
    """u(t, x, ...) for one family: kernels realized at the wave phase.

    ``redundant`` coefficients (free, dropped by compression) only reparametrize
    the family and are set to zero in the assembled solution.
    """
    aux = inst.aux
    if aux.realization is None:
        raise ValueError(f"aux {aux.name!r} has no closed-form realization")
    zero = {s: Expr() for s in redundant if s in set(fam.free)}
    table = {s: v.subs(zero) if zero else v for s, v in fam.assignment}
    table.update(zero)
    phase = Expr()
    for a, x in zip(wave.wave_params, independents):
        phase = phase + table.get(a, Expr.atom(a)) * Expr.atom(x)
    if phase.is_zero():
        # all wave parameters vanish: the kernels are constants, not a wave
        return Family(fam, None, phase)
    v = inst.body.subs(table)
    real = aux.realization
    mod = () if real.modulus is None else (real.modulus,)
    kt, mt = {}, {}
    for i, (k, fn) in enumerate(zip(aux.kernels, real.funcs)):
        app = apply(fn, phase, *mod)
        kt[k] = app
        (m, _), = app.terms.items()
        mt[aux.marker(i)] = _apply_derivative(atom_by_id(m[0][0]))
    u = v.subs(mt).subs(kt)
    free = tuple(sorted((s for s in u.free_syms() if s not in set(independents)),
                        key=lambda s: s.id))
    sol = ClosedFormSolution(u, free, (), fam.side_conditions, aux.name)
    return Family(fam, sol, phase)


def derive(cfg: DeriveConfig) -> Derivation:
    p = parse_pde(cfg.equation, cfg.params)
    wave = WaveSub.default(p.independents)
    o = reduce_pde(p, wave)
    aux = make_aux(cfg.aux)
    bal = None
    if cfg.orders is not None:
        shape = cfg.orders
    else:
        bal = balance(o, aux, cfg.arity, cfg.max_order)
        shape = bal.shape
    inst = build(shape, aux)
    comp = compress(inst)
    system = system_for(o, comp.reduced, wave.wave_params)
    result = solve_system(system, cfg.budget)
    full = system_for(o, inst, wave.wave_params)
    fams = []
    for f in result.families:
        lifted = lift_family(f, comp, full)
        fams.append(assemble(lifted, inst, wave, p.independents, comp.dropped)
                    if aux.realization is not None else Family(lifted, None, Expr()))
    return Derivation(p, o, wave, aux, shape, bal, comp, system, result, fams)
