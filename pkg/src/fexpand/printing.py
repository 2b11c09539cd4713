"""Ascii (grammar) and LaTeX rendering of expressions."""

from __future__ import annotations

import re

from .symcore import Apply, Deriv, Expr, Sym, atom_by_id, mono_sort_key

_GREEK = {
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "kappa",
    "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "phi", "chi", "psi", "omega",
}


def _fmt_rat(c) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def atom_text(a) -> str:
    if isinstance(a, Sym):
        return a.name
    if isinstance(a, Deriv):
        names = [s.name for s, c in a.orders for _ in range(c)]
        if all(len(n) == 1 for n in names):
            return f"{a.fn.name}_{''.join(names)}"
        return f"D[{a.fn.name},{','.join(names)}]"
    args = [to_text(a.arg)] + [to_text(p) for p in a.params]
    return f"{a.fn}({', '.join(args)})"


def _mono_text(m) -> list[str]:
    parts = []
    for aid, e in m:
        s = atom_text(atom_by_id(aid))
        if e == 1:
            parts.append(s)
        elif e < 0:
            parts.append(f"{s}^({e})")
        else:
            parts.append(f"{s}^{e}")
    return parts


def to_text(e: Expr) -> str:
    """Render in the input grammar; the output re-parses to the same value."""
    if not e.terms:
        return "0"
    out = []
    for i, (m, c) in enumerate(e.sorted_terms()):
        neg = c < 0
        mag = -c if neg else c
        parts = _mono_text(m)
        if mag != 1 or not parts:
            parts.insert(0, _fmt_rat(mag))
        body = "*".join(parts)
        if i == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


# ---------------------------------------------------------------------------
# LaTeX


def latex_name(name: str) -> str:
    if name in _GREEK:
        return "\\" + name
    if name == "eps":
        return "\\epsilon"
    m = re.fullmatch(r"([a-zA-Z]+?)(m?)(\d+)", name)
    if m:
        base, neg, idx = m.groups()
        return f"{latex_name(base)}_{{{'-' if neg else ''}{idx}}}"
    return name


def _latex_atom(a) -> tuple[str, bool]:
    """(text, is_function_call)."""
    if isinstance(a, Sym):
        return latex_name(a.name), False
    if isinstance(a, Deriv):
        if len(a.orders) == 1:
            s, c = a.orders[0]
            sub = latex_name(s.name) * c if c <= 2 else f"{c}{latex_name(s.name)}"
        else:
            sub = "".join(latex_name(s.name) * c for s, c in a.orders)
        if len(sub) > 1:
            sub = "{" + sub + "}"
        return f"{latex_name(a.fn.name)}_{sub}", False
    return a.fn, True


def _latex_arg(a: Apply) -> str:
    args = [to_latex(a.arg)] + [to_latex(p) for p in a.params]
    return "\\left(" + ", ".join(args) + "\\right)"


def _latex_factor(aid, e) -> str:
    a = atom_by_id(aid)
    name, call = _latex_atom(a)
    if call:
        fn = f"\\{name}" if name in ("tanh", "tan", "exp", "sinh", "cosh", "sin", "cos") \
            else f"\\mathrm{{{name}}}"
        power = "" if e == 1 else f"^{{{e}}}"
        return f"{fn}{power}{_latex_arg(a)}"
    return name if e == 1 else f"{name}^{{{e}}}"


def _join(parts: list[str]) -> str:
    out = ""
    for p in parts:
        # a space is only needed before a letter following a control word
        if out and re.search(r"\\[a-zA-Z]+$", out) and p[:1].isalpha():
            out += " "
        out += p
    return out


def to_latex(e: Expr) -> str:
    """LaTeX with kernel powers in descending order."""
    if not e.terms:
        return "0"

    def kdeg(m):
        return sum(ex for aid, ex in m if isinstance(atom_by_id(aid), Apply))

    items = sorted(e.terms.items(), key=lambda t: (-kdeg(t[0]), mono_sort_key(t[0])))
    out = []
    for i, (m, c) in enumerate(items):
        neg = c < 0
        mag = -c if neg else c
        num = [_latex_factor(aid, ex) for aid, ex in m if ex > 0]
        den = [_latex_factor(aid, -ex) for aid, ex in m if ex < 0]
        if den:
            top = _join(num) if num else "1"
            if mag.denominator != 1 or mag.numerator != 1:
                top = f"{mag.numerator} {top}" if num else str(mag.numerator)
                bottom = " ".join(([str(mag.denominator)] if mag.denominator != 1 else []) + den)
            else:
                bottom = " ".join(den)
            body = f"\\frac{{{top}}}{{{bottom}}}"
        else:
            coeff = ""
            if mag.denominator != 1:
                coeff = f"\\frac{{{mag.numerator}}}{{{mag.denominator}}}"
            elif mag != 1 or not num:
                coeff = str(mag.numerator)
            body = _join(([coeff] if coeff else []) + num)
        sign = "-" if neg else ("+" if i else "")
        out.append(sign + body)
    return "".join(out)
