"""Command-line front end: reduce | balance | solve | verify | corpus."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .algsolve import Budget
from .ansatz import AnsatzShape, NoBalanceError, balance, block_keys
from .auxreg import AuxError
from .pdeparse import InputError, parse_pde, print_pde
from .pipeline import DeriveConfig, derive, make_aux
from .reduce import SolvableByQuadrature, WaveSub, reduce_pde
from .verify import bundled_corpus, load_fixtures, verify_corpus

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3
COMMANDS = ("reduce", "balance", "solve", "verify", "corpus")


@dataclass(frozen=True)
class RunConfig:
    command: str
    equation: str = ""
    params: tuple = ()
    aux: str = "tanh"
    arity: int | None = None
    orders: str | None = None
    max_order: int = 12
    budget: Budget = field(default_factory=Budget)
    format: str = "text"
    fixtures: str | None = None
    workers: int | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.format not in ("json", "text", "latex"):
            raise InputError(f"unknown format {self.format!r}")
        if self.command in ("reduce", "balance", "solve") and not self.equation.strip():
            raise InputError("an equation is required")
        if self.max_order < 1:
            raise InputError("--max-order must be at least 1")
        if self.arity is not None and self.arity < 1:
            raise InputError("--arity must be at least 1")


def parse_orders(text: str, arity: int) -> AnsatzShape:
    """``N`` (uniform), ``m,mhat`` for one kernel, or ``;``-separated blocks."""
    text = text.strip()
    try:
        if text.isdigit():
            return AnsatzShape.uniform(arity, int(text))
        if arity == 1 and ";" not in text:
            return AnsatzShape(1, tuple((int(x),) for x in text.split(",")))
        blocks = tuple(tuple(int(x) for x in b.split(",")) for b in text.split(";"))
        return AnsatzShape(arity, blocks)
    except ValueError as exc:
        raise InputError(f"invalid --orders {text!r}: {exc}") from None


def _emit(doc, fmt: str, text_lines, latex_lines=None, out=None):
    out = out if out is not None else sys.stdout
    if fmt == "json":
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    elif fmt == "latex" and latex_lines is not None:
        out.write("\n".join(latex_lines) + "\n")
    else:
        out.write("\n".join(text_lines) + "\n")


def cmd_reduce(cfg: RunConfig, out=None) -> int:
    p = parse_pde(cfg.equation, cfg.params)
    o = reduce_pde(p, WaveSub.default(p.independents))
    doc = {"schema_version": SCHEMA_VERSION, "command": "reduce", "pde": print_pde(p),
           "ode": f"{o.lhs} = 0", "independents": [s.name for s in p.independents],
           "wave_params": [s.name for s in WaveSub.default(p.independents).wave_params]}
    _emit(doc, cfg.format, [doc["ode"]], [o.latex()], out)
    return EXIT_OK


def cmd_balance(cfg: RunConfig, out=None) -> int:
    p = parse_pde(cfg.equation, cfg.params)
    o = reduce_pde(p, WaveSub.default(p.independents))
    aux = make_aux(cfg.aux)
    b = balance(o, aux, cfg.arity, cfg.max_order)
    doc = {"schema_version": SCHEMA_VERSION, "command": "balance", "aux": aux.name,
           "arity": b.shape.arity, "orders": b.shape.as_dict(), "m1": str(b.m1), "m2": str(b.m2)}
    _emit(doc, cfg.format, [str(b.shape)], None, out)
    return EXIT_OK


def cmd_solve(cfg: RunConfig, out=None) -> int:
    aux = make_aux(cfg.aux)
    arity = cfg.arity if cfg.arity is not None else aux.arity
    shape = parse_orders(cfg.orders, arity) if cfg.orders else None
    d = derive(DeriveConfig(cfg.equation, cfg.params, cfg.aux, cfg.arity, shape,
                            cfg.max_order, cfg.budget))
    fams = [f.to_json() for f in d.families]
    doc = {
        "schema_version": SCHEMA_VERSION, "command": "solve",
        "pde": print_pde(d.pde), "ode": f"{d.ode.lhs} = 0", "aux": d.aux.name,
        "orders": d.shape.as_dict(),
        "unknowns": len(d.compression.full.coeffs) + len(d.wave.wave_params),
        "reduced_unknowns": len(d.system.unknowns), "equations": len(d.system),
        "complete": d.complete, "families": fams,
        "mirror_pairs": [list(p) for p in d.mirror_pairs()],
        "unresolved": [{"reason": u.reason, "equations": [str(e) for e in u.equations]}
                       for u in d.result.unresolved],
    }
    text = [f"ode: {doc['ode']}", f"aux: {d.aux.name}  orders: {d.shape}",
            f"system: {doc['equations']} equations, {doc['reduced_unknowns']} unknowns "
            f"after removing redundant coefficients ({doc['unknowns']} before)",
            f"families: {len(fams)}" + ("" if d.complete else "  (incomplete: budget exhausted)")]
    latex = []
    for i, f in enumerate(d.families, 1):
        j = fams[i - 1]
        text.append(f"[{i}] " + ", ".join(f"{k}={v}" for k, v in j["assignment"].items()
                                          if v != "0") + (f"  free: {', '.join(j['free'])}"
                                                           if j["free"] else ""))
        if f.solution is not None:
            text.append(f"    u = {j['solution']}")
            latex.append(f"u_{{{i}}} = {f.solution.expression.latex()}")
    for u in d.result.unresolved:
        text.append(f"unresolved: {u.reason}")
    _emit(doc, cfg.format, text, latex, out)
    return EXIT_OK if d.complete else EXIT_BUDGET


def _fixtures(cfg: RunConfig) -> list:
    if cfg.fixtures is None:
        return bundled_corpus()
    path = Path(cfg.fixtures)
    if not path.is_file():
        raise InputError(f"fixture file {cfg.fixtures!r} not found")
    try:
        return load_fixtures(path)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"malformed fixture file: {exc}") from None


def cmd_verify(cfg: RunConfig, out=None) -> int:
    summary = verify_corpus(_fixtures(cfg), workers=cfg.workers)
    doc = {"schema_version": SCHEMA_VERSION, "command": "verify", **summary.to_json()}
    text = []
    for r in summary.results:
        mark = "ok" if r.ok else ("documented" if r.whitelisted else "FAIL")
        line = f"{r.fixture.id:24s} {r.verdict:8s} {mark}"
        if not r.ok:
            line += f"  residual: {r.residual or r.error}"
            if r.whitelisted:
                line += f"  ({r.fixture.discrepancy})"
        text.append(line)
    text.append(f"{doc['zero']}/{doc['total']} verified zero")
    _emit(doc, cfg.format, text, None, out)
    return summary.exit_status


def cmd_corpus(cfg: RunConfig, out=None) -> int:
    fx = _fixtures(cfg)
    doc = {"schema_version": SCHEMA_VERSION, "command": "corpus",
           "fixtures": [f.to_json() for f in fx]}
    text = [f"{f.id:24s} {f.solution}" for f in fx]
    _emit(doc, cfg.format, text, None, out)
    return EXIT_OK


HANDLERS = {"reduce": cmd_reduce, "balance": cmd_balance, "solve": cmd_solve,
            "verify": cmd_verify, "corpus": cmd_corpus}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fexpand",
                                 description="Travelling-wave solutions by function expansion.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("equation", nargs="?", default="")
    ap.add_argument("--params", default="", help="comma-separated symbolic constants")
    ap.add_argument("--aux", default="tanh", help="NAME[:k=v,...]")
    ap.add_argument("--arity", type=int)
    ap.add_argument("--orders", help="override balancing: N, m,mhat or blocks a;b;c;d")
    ap.add_argument("--max-order", type=int, default=12)
    ap.add_argument("--max-depth", type=int, default=Budget.max_depth)
    ap.add_argument("--max-branches", type=int, default=Budget.max_branches)
    ap.add_argument("--timeout-seconds", type=float)
    ap.add_argument("--format", default="text", choices=("json", "text", "latex"))
    ap.add_argument("--fixtures")
    ap.add_argument("--workers", type=int)
    return ap


def config_from_args(ns) -> RunConfig:
    params = tuple(p.strip() for p in ns.params.split(",") if p.strip())
    budget = Budget(max_depth=ns.max_depth, max_branches=ns.max_branches,
                    timeout_seconds=ns.timeout_seconds)
    cfg = RunConfig(ns.command, ns.equation, params, ns.aux, ns.arity, ns.orders, ns.max_order,
                    budget, ns.format, ns.fixtures, ns.workers)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = config_from_args(ns)
        return HANDLERS[cfg.command](cfg)
    except (InputError, AuxError, NoBalanceError, SolvableByQuadrature, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
