"""Exact travelling-wave solutions of polynomial PDEs by function expansion."""

from .algsolve import Budget, SolutionFamily, SolveResult, solve_system
from .ansatz import AnsatzShape, balance, build, compress
from .auxreg import AuxSystem, builtin
from .collect import AlgSystem, extract_system, substitute, system_for
from .pdeparse import PdeSpec, parse_expr, parse_pde, print_pde
from .pipeline import DeriveConfig, derive
from .reduce import OdeSpec, WaveSub, reduce_pde
from .symcore import Expr, sym
from .verify import ClosedFormSolution, parse_solution, verify_corpus, verify_solution

__version__ = "0.1.0"

__all__ = [
    "AlgSystem", "AnsatzShape", "AuxSystem", "Budget", "ClosedFormSolution", "DeriveConfig",
    "Expr", "OdeSpec", "PdeSpec", "SolutionFamily", "SolveResult", "WaveSub", "balance",
    "build", "builtin", "compress", "derive", "extract_system", "parse_expr", "parse_pde",
    "parse_solution", "print_pde", "reduce_pde", "solve_system", "substitute", "sym",
    "system_for", "verify_corpus", "verify_solution",
]
