"""The ``.qaut`` authoring format.

Grammar reference: ``docs/grammar.md``.
"""

from __future__ import annotations

from pathlib import Path

from ..linalg import DEFAULT_TOL
from .diagnostics import Diagnostic, DslError, Pos
from .elaborate import elaborate, eval_state
from .parser import SourceDoc, parse, parse_matrix_expr
from .serialize import serialize


def loads(text: str, name: str = "<input>", tol: float = DEFAULT_TOL):
    return elaborate(parse(SourceDoc(text, name)), tol)


def load(path, tol: float = DEFAULT_TOL):
    path = Path(path)
    return loads(path.read_text(encoding="utf-8"), str(path), tol)


def parse_state(text: str, dim: int | None = None, tol: float = DEFAULT_TOL):
    """Parse and evaluate a density-matrix expression such as ``pure(ket("0"))``."""
    return eval_state(parse_matrix_expr(text), dim, tol)


__all__ = [
    "Diagnostic",
    "DslError",
    "Pos",
    "SourceDoc",
    "elaborate",
    "load",
    "loads",
    "parse",
    "parse_matrix_expr",
    "parse_state",
    "serialize",
]
