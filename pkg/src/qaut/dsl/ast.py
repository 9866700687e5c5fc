"""Syntax tree for ``.qaut`` documents. Every node records its source position."""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import Pos


# scalar expressions
@dataclass(frozen=True)
class Num:
    value: complex
    pos: Pos


@dataclass(frozen=True)
class Neg:
    operand: "Scalar"
    pos: Pos


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Scalar"
    right: "Scalar"
    pos: Pos


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Scalar"
    pos: Pos


Scalar = Num | Neg | BinOp | Func


# matrix expressions
@dataclass(frozen=True)
class Literal:
    rows: tuple[tuple[Scalar, ...], ...]
    pos: Pos


@dataclass(frozen=True)
class Const:
    name: str
    pos: Pos


@dataclass(frozen=True)
class Call:
    """``identity``, ``kron``, ``matmul``, ``adjoint``, ``scale``, ``ket``, ``proj``, ``pure``.

    ``args`` mixes matrix expressions, scalars (for ``scale``), integers (for
    ``identity``) and strings (for ``ket``/``proj``).
    """

    name: str
    args: tuple
    pos: Pos


@dataclass(frozen=True)
class Str:
    value: str
    pos: Pos


@dataclass(frozen=True)
class Int:
    value: int
    pos: Pos


MatrixExpr = Literal | Const | Call


@dataclass(frozen=True)
class NodeDecl:
    name: str
    initial: bool
    terminal: bool
    pos: Pos


@dataclass(frozen=True)
class ArcDecl:
    id: str
    dom: str
    codom: str
    pos: Pos


@dataclass(frozen=True)
class KrausDecl:
    label: str
    expr: MatrixExpr
    pos: Pos


@dataclass(frozen=True)
class OpDecl:
    node: str
    blocks: tuple[KrausDecl, ...]
    pos: Pos


@dataclass(frozen=True)
class ProbDecl:
    node: str
    snapshot: str
    entries: tuple[tuple[str, Scalar, Pos], ...]
    pos: Pos


@dataclass(frozen=True)
class MapDecl:
    arc: str
    entries: tuple[tuple[str, str, Pos], ...]
    pos: Pos


@dataclass
class SpecAst:
    kind: str  # "automaton" or "machine"
    name: str
    pos: Pos
    source: str = "<input>"
    dim: int | None = None
    dim_pos: Pos | None = None
    snapshots: tuple[str, ...] = ()
    snapshots_pos: Pos | None = None
    nodes: list[NodeDecl] = field(default_factory=list)
    arcs: list[ArcDecl] = field(default_factory=list)
    ops: list[OpDecl] = field(default_factory=list)
    probs: list[ProbDecl] = field(default_factory=list)
    maps: list[MapDecl] = field(default_factory=list)
    init: MatrixExpr | str | None = None
    init_pos: Pos | None = None
