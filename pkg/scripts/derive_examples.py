"""Derive solution families for the worked equations and print them.

Runs the full pipeline (reduce, balance, expand, collect, solve, verify) on
Burgers-Fisher, Kawahara and the five fifth-order members.  Pass names to
restrict the run, e.g. ``python3 scripts/derive_examples.py bf sk``.
"""

import sys
import time

from fexpand.pipeline import DeriveConfig, derive
from fexpand.verify import verify_solution

FIFTH = "u_t + {}*u^2*u_x + {}*u_x*u_xx + {}*u*u_xxx + u_xxxxx = 0"
EQUATIONS = {
    "bf": "u_xx + u*u_x - u_t + u - u^2 = 0",
    "kawahara": "u_t + 6*u*u_x + u_xxx - u_xxxxx = 0",
    "sk": FIFTH.format(5, 5, 5),
    "cdg": FIFTH.format(180, 30, 30),
    "lax": FIFTH.format(30, 20, 10),
    "kk": FIFTH.format(20, 25, 10),
    "ito": FIFTH.format(2, 6, 3),
}


def run(name: str, text: str) -> None:
    t0 = time.perf_counter()
    d = derive(DeriveConfig(text))
    dt = time.perf_counter() - t0
    status = "complete" if d.complete else "incomplete"
    print(f"== {name}: {text}")
    print(f"   orders {d.shape}, {len(d.families)} families, {status}, {dt:.2f} s")
    for i, f in enumerate(d.families, 1):
        if f.solution is None:
            continue
        ok = verify_solution(f.solution, d.pde).is_zero
        print(f"   [{i}] u = {f.solution.expression}  ({'verified' if ok else 'RESIDUAL'})")
    for u in d.result.unresolved:
        print(f"   unresolved: {u.reason}")


def main(argv) -> int:
    names = argv or list(EQUATIONS)
    for n in names:
        if n not in EQUATIONS:
            print(f"unknown equation {n!r}; choose from {', '.join(EQUATIONS)}", file=sys.stderr)
            return 2
        run(n, EQUATIONS[n])
    return 0


if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
