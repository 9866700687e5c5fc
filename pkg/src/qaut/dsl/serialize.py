"""Canonical text form of automata and machines."""

from __future__ import annotations

import re

import numpy as np

from ..automaton import AbstractQuantumAutomaton
from ..classical import StochasticASM
from ..graph import out_arcs
from .parser import SourceDoc

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_DIGITS = re.compile(r"\d+\Z")


def fmt_real(x: float) -> str:
    s = format(float(x), ".17g")
    return "0" if s == "-0" else s


def fmt_complex(z: complex) -> str:
    re_, im = float(z.real), float(z.imag)
    if im == 0.0:
        return fmt_real(re_)
    if re_ == 0.0:
        return f"{fmt_real(im)}i"
    sign = "-" if im < 0 else "+"
    return f"{fmt_real(re_)}{sign}{fmt_real(abs(im))}i"


def fmt_matrix(m: np.ndarray) -> str:
    rows = ", ".join("[" + ", ".join(fmt_complex(z) for z in row) + "]" for row in np.asarray(m))
    return f"[{rows}]"


def fmt_label(label: str) -> str:
    from .lexer import KEYWORDS

    if (_IDENT.match(label) and label not in KEYWORDS) or _DIGITS.match(label):
        return label
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def fmt_string(label: str) -> str:
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _nodes(g) -> list[str]:
    lines = []
    for n in g.nodes:
        flags = (" initial" if n == g.initial else "") + (" terminal" if n in g.terminals else "")
        lines.append(f"  node {n}{flags}")
    for a in g.arcs:
        lines.append(f"  arc {fmt_label(a.id)}: {a.dom} -> {a.codom}")
    return lines


def serialize(model: AbstractQuantumAutomaton | StochasticASM) -> SourceDoc:
    """Render ``model`` as canonical ``.qaut`` text (17 significant digits)."""
    if isinstance(model, AbstractQuantumAutomaton):
        lines = [f"automaton {model.name} {{", f"  dim = {model.dim}"]
        lines += _nodes(model.graph)
        for n in model.graph.nodes:
            op = model.ops.get(n)
            if op is None:
                continue
            lines.append(f"  op {n} {{")
            for x in op.outcomes:
                lines.append(f"    K({fmt_string(x)}) = {fmt_matrix(op.block(x))}")
            lines.append("  }")
        if model.initial_state is not None:
            lines.append(f"  init = {fmt_matrix(model.initial_state.matrix)}")
        lines.append("}")
    elif isinstance(model, StochasticASM):
        lines = [f"machine {model.name} {{"]
        lines.append("  snapshots { " + ", ".join(fmt_label(s) for s in model.snapshots) + " }")
        lines += _nodes(model.graph)
        for n in model.graph.nodes:
            if model.graph.is_terminal(n):
                continue
            for s in model.snapshots:
                row = model.dist.get((n, s), {})
                entries = ", ".join(f"{fmt_label(a)}: {fmt_real(row.get(a, 0.0))}" for a in out_arcs(model.graph, n))
                lines.append(f"  prob({n}, {fmt_label(s)}) {{ {entries} }}")
        for a in model.graph.arcs:
            table = model.transforms.get(a.id, {})
            entries = ", ".join(f"{fmt_label(s)} -> {fmt_label(table[s])}" for s in model.snapshots if s in table)
            lines.append(f"  map({fmt_label(a.id)}) {{ {entries} }}")
        if model.initial_snapshot is not None:
            lines.append(f"  init = {fmt_label(model.initial_snapshot)}")
        lines.append("}")
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return SourceDoc("\n".join(lines) + "\n", model.name + ".qaut")
