"""Turn a parsed document into an automaton or machine, with positioned diagnostics."""

from __future__ import annotations

import math

import numpy as np

from ..automaton import AbstractQuantumAutomaton, validate_automaton
from ..classical import StochasticASM, validate_asm
from ..errors import QautError
from ..graph import Arc, ControlGraph, out_arcs
from ..linalg import DEFAULT_TOL
from ..quantum import KrausFamily, OutcomeSet, QuantumOperation, make_density
from . import ast
from .diagnostics import Diagnostic, DslError, Pos
from .evaluate import EvalError, eval_matrix, eval_scalar


class _Elaborator:
    def __init__(self, tree: ast.SpecAst, tol: float):
        self.tree = tree
        self.tol = tol
        self.diags: list[Diagnostic] = []
        self.positions: dict[str, Pos] = {}

    def diag(self, pos: Pos | None, message: str, lexeme: str = ""):
        self.diags.append(Diagnostic(pos or self.tree.pos, message, lexeme, self.tree.source))

    def graph(self) -> ControlGraph | None:
        t = self.tree
        seen: dict[str, ast.NodeDecl] = {}
        for n in t.nodes:
            if n.name in seen:
                self.diag(n.pos, f"node {n.name!r} declared twice (first at {seen[n.name].pos})", n.name)
            else:
                seen[n.name] = n
            self.positions.setdefault(n.name, n.pos)
        for a in t.arcs:
            if a.id in self.positions and a.id not in seen:
                self.diag(a.pos, f"arc {a.id!r} declared twice", a.id)
            self.positions.setdefault(a.id, a.pos)
            for end in (a.dom, a.codom):
                if end not in seen:
                    self.diag(a.pos, f"arc {a.id!r} refers to undeclared node {end!r}", end)
        initials = [n for n in seen.values() if n.initial]
        if not seen:
            self.diag(t.pos, f"{t.kind} {t.name!r} declares no nodes", t.name)
            return None
        if len(initials) != 1:
            where = initials[1].pos if len(initials) > 1 else t.pos
            self.diag(where, f"exactly one node must be marked initial, found {len(initials)}")
            return None
        terminals = [n.name for n in seen.values() if n.terminal]
        return ControlGraph(
            tuple(seen),
            tuple(Arc(a.id, a.dom, a.codom) for a in t.arcs),
            initials[0].name,
            frozenset(terminals),
        )

    def report(self, violations, extra: dict[str, Pos] | None = None):
        extra = extra or {}
        for v in violations:
            pos = extra.get(v.subject) or self.positions.get(v.subject) or self.tree.pos
            self.diag(pos, v.message if v.subject in v.message else f"{v.subject}: {v.message}", v.subject)

    def automaton(self) -> AbstractQuantumAutomaton | None:
        t = self.tree
        if t.dim is None:
            self.diag(t.pos, f"automaton {t.name!r} must declare 'dim = <n>'", t.name)
            return None
        if t.dim < 2:
            self.diag(t.dim_pos, f"state space dimension must exceed 1, got {t.dim}", str(t.dim))
            return None
        g = self.graph()
        ops: dict[str, QuantumOperation] = {}
        op_pos: dict[str, Pos] = {}
        for od in t.ops:
            if od.node in op_pos:
                self.diag(od.pos, f"node {od.node!r} has two op blocks (first at {op_pos[od.node]})", od.node)
                continue
            op_pos[od.node] = od.pos
            blocks: dict[str, np.ndarray] = {}
            ok = True
            for kd in od.blocks:
                if kd.label in blocks:
                    self.diag(kd.pos, f"outcome {kd.label!r} given twice in op {od.node!r}", kd.label)
                    ok = False
                    continue
                try:
                    k = eval_matrix(kd.expr)
                except EvalError as e:
                    self.diags.append(e.diagnostic(t.source))
                    ok = False
                    continue
                except QautError as e:
                    self.diag(kd.pos, str(e), kd.label)
                    ok = False
                    continue
                if k.shape != (t.dim, t.dim):
                    self.diag(
                        kd.pos,
                        f"{k.shape[0]}x{k.shape[1]} operator in {t.dim}-dim context (op {od.node!r}, outcome {kd.label!r})",
                        kd.label,
                    )
                    ok = False
                    continue
                blocks[kd.label] = k
            if not od.blocks:
                self.diag(od.pos, f"op {od.node!r} has no Kraus blocks", od.node)
                ok = False
            if not ok:
                continue
            if g is not None and od.node in g.nodes and set(blocks) == set(out_arcs(g, od.node)):
                order = out_arcs(g, od.node)
            else:
                order = tuple(blocks)
            ops[od.node] = QuantumOperation(KrausFamily(t.dim, OutcomeSet(order), blocks, math.inf))
        init = None
        if t.init is not None:
            try:
                init = make_density(eval_matrix(t.init), self.tol)
                if init.dim != t.dim:
                    self.diag(t.init_pos, f"initial state has dimension {init.dim}, automaton has {t.dim}")
                    init = None
            except EvalError as e:
                self.diags.append(e.diagnostic(t.source))
            except QautError as e:
                self.diag(t.init_pos, f"invalid initial state: {e}")
        if g is None or self.diags:
            return None
        a = AbstractQuantumAutomaton(t.dim, g, ops, t.name, init)
        self.report(validate_automaton(a, self.tol), op_pos)
        return None if self.diags else a

    def machine(self) -> StochasticASM | None:
        t = self.tree
        if not t.snapshots:
            self.diag(t.pos, f"machine {t.name!r} must declare its snapshots", t.name)
            return None
        g = self.graph()
        snaps = set(t.snapshots)
        dist: dict[tuple[str, str], dict[str, float]] = {}
        extra: dict[str, Pos] = {}
        for pd in t.probs:
            key = (pd.node, pd.snapshot)
            extra[f"{pd.node},{pd.snapshot}"] = pd.pos
            if pd.snapshot not in snaps:
                self.diag(pd.pos, f"unknown snapshot {pd.snapshot!r}", pd.snapshot)
                continue
            if key in dist:
                self.diag(pd.pos, f"prob({pd.node}, {pd.snapshot}) given twice")
                continue
            row = {}
            for arc, expr, pos in pd.entries:
                try:
                    p = eval_scalar(expr)
                except EvalError as e:
                    self.diags.append(e.diagnostic(t.source))
                    continue
                if p.imag != 0:
                    self.diag(pos, f"probability for {arc!r} must be real, got {p}", arc)
                    continue
                if arc in row:
                    self.diag(pos, f"arc {arc!r} listed twice", arc)
                row[arc] = p.real
            dist[key] = row
        transforms: dict[str, dict[str, str]] = {}
        for md in t.maps:
            extra.setdefault(md.arc, md.pos)
            if md.arc in transforms:
                self.diag(md.pos, f"map({md.arc}) given twice", md.arc)
                continue
            table = {}
            for src, dst, pos in md.entries:
                if src in table:
                    self.diag(pos, f"snapshot {src!r} mapped twice", src)
                table[src] = dst
            transforms[md.arc] = table
        init = t.init if isinstance(t.init, str) else None
        if init is not None and init not in snaps:
            self.diag(t.init_pos, f"unknown initial snapshot {init!r}", init)
        if g is None or self.diags:
            return None
        m = StochasticASM(g, t.snapshots, transforms, dist, t.name, init)
        self.report(validate_asm(m, self.tol), extra)
        return None if self.diags else m


def elaborate(tree: ast.SpecAst, tol: float = DEFAULT_TOL) -> AbstractQuantumAutomaton | StochasticASM:
    """Build and validate the model; raise :class:`DslError` with positioned diagnostics."""
    e = _Elaborator(tree, tol)
    model = e.automaton() if tree.kind == "automaton" else e.machine()
    if model is None:
        if not e.diags:
            e.diag(tree.pos, "model could not be elaborated")
        raise DslError(e.diags)
    return model


def eval_state(expr, dim: int | None = None, tol: float = DEFAULT_TOL, source: str = "<expr>"):
    """Evaluate a density-matrix expression (``pure(...)`` or a matrix)."""
    try:
        rho = make_density(eval_matrix(expr), tol)
    except EvalError as e:
        raise DslError([e.diagnostic(source)]) from None
    except QautError as e:
        raise DslError([Diagnostic(expr.pos, f"invalid state: {e}", "", source)]) from None
    if dim is not None and rho.dim != dim:
        raise DslError([Diagnostic(expr.pos, f"state has dimension {rho.dim}, expected {dim}", "", source)])
    return rho
