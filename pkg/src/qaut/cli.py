"""``qaut`` command-line front end.

Exit codes: 0 success, 1 model or verdict error, 2 I/O failure,
3 not equivalent, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shutil
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import dsl
from .automaton import AbstractQuantumAutomaton, enumerate_runs, final_mixture, sample_run
from .classical import StochasticASM, enumerate_classical, sample_classical_run
from .errors import QautError
from .linalg import DEFAULT_TOL
from .quantum import inequivalence_witness, kraus_to_isometry, isometry_to_kraus, phase_equivalent

SCHEMA_VERSION = "1.0"

EXIT_OK = 0
EXIT_MODEL = 1
EXIT_IO = 2
EXIT_NOT_EQUIVALENT = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {n}")
    return n


def _nonneg_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (x >= 0.0 and math.isfinite(x)):
        raise argparse.ArgumentTypeError(f"must be a finite non-negative number, got {text}")
    return x


def default_tol() -> float:
    raw = os.environ.get("QAUT_TOL")
    if raw is None or raw.strip() == "":
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise UsageError(f"QAUT_TOL is not a number: {raw!r}") from None
    if not (tol > 0 and math.isfinite(tol)):
        raise UsageError(f"QAUT_TOL must be positive and finite, got {raw!r}")
    return tol


# formatting


def json_matrix(m) -> list:
    """Nested ``[re, im]`` pairs; Python floats round-trip exactly through JSON."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _fmt4(z: complex) -> str:
    re_ = f"{z.real:.4f}"
    im = f"{abs(z.imag):.4f}"
    sign = "-" if z.imag < 0 and im != "0.0000" else "+"
    return f"{re_}{sign}{im}i".replace("-0.0000", "0.0000")


def text_matrix(m, indent: str = "  ") -> str:
    cells = [[_fmt4(z) for z in row] for row in np.asarray(m)]
    width = max(len(c) for row in cells for c in row)
    return "\n".join(indent + "[ " + "  ".join(c.rjust(width) for c in row) + " ]" for row in cells)


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines += ["  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


# model loading


def _load(path: str, tol: float):
    return dsl.load(path, tol)


def _initial_state(args, model: AbstractQuantumAutomaton, tol: float):
    if args.initial is not None:
        return dsl.parse_state(args.initial, model.dim, tol), args.initial
    if args.initial_file is not None:
        text = Path(args.initial_file).read_text(encoding="utf-8")
        return dsl.parse_state(text, model.dim, tol), text.strip()
    if model.initial_state is not None:
        return model.initial_state, "init declared in model"
    raise UsageError("no initial state: pass --initial or --initial-file, or declare 'init' in the model")


def _initial_snapshot(args, model: StochasticASM) -> str:
    if args.initial_file is not None:
        label = Path(args.initial_file).read_text(encoding="utf-8").strip()
    else:
        label = args.initial if args.initial is not None else model.initial_snapshot
    if label is None:
        raise UsageError("no initial snapshot: pass --initial or declare 'init' in the machine")
    if label not in model.snapshots:
        raise QautError(f"unknown snapshot {label!r}; machine has {list(model.snapshots)}")
    return label


# commands


def cmd_validate(args, tol: float) -> int:
    model = _load(args.path, tol)
    kind = "automaton" if isinstance(model, AbstractQuantumAutomaton) else "machine"
    print(f"{args.path}: ok ({kind} {model.name!r}, {len(model.graph.nodes)} nodes, {len(model.graph.arcs)} arcs)")
    return EXIT_OK


def cmd_run(args, tol: float) -> int:
    model = _load(args.path, tol)
    if isinstance(model, StochasticASM):
        s0 = _initial_snapshot(args, model)
        trace = sample_classical_run(model, s0, args.seed, args.max_steps)
        steps = [(s.node, s.arc, model.prob(s.arc, s.snapshot, s.node) if s.arc else None, s.snapshot) for s in trace.steps]
        if args.json:
            _emit({
                "schema-version": SCHEMA_VERSION,
                "kind": "classical-trace",
                "machine": model.name,
                "initial-snapshot": s0,
                "seed": args.seed,
                "max-steps": args.max_steps,
                "steps": [{"node": n, "arc": a, "probability": p, "snapshot": s} for n, a, p, s in steps],
                "status": trace.status,
            })
        else:
            rows = [[str(i), n, a or "-", "-" if p is None else f"{p:.6f}", s] for i, (n, a, p, s) in enumerate(steps)]
            print(_table(["step", "node", "arc", "probability", "snapshot"], rows))
            print(f"status: {trace.status}")
        return EXIT_OK
    rho0, desc = _initial_state(args, model, tol)
    trace = sample_run(model, rho0, args.seed, args.max_steps, tol=tol)
    if args.json:
        _emit({
            "schema-version": SCHEMA_VERSION,
            "kind": "trace",
            "automaton": model.name,
            "initial-state": {"description": desc, "matrix": json_matrix(rho0.matrix)},
            "seed": args.seed,
            "max-steps": args.max_steps,
            "steps": [
                {
                    "node": s.config.node,
                    "arc": s.arc,
                    "probability": s.probability,
                    "state": json_matrix(s.config.state.matrix),
                }
                for s in trace.steps
            ],
            "status": trace.status,
        })
        return EXIT_OK
    rows = [
        [str(i), s.config.node, s.arc or "-", "-" if s.probability is None else f"{s.probability:.6f}"]
        for i, s in enumerate(trace.steps)
    ]
    print(f"automaton {model.name}, seed {args.seed}")
    print(_table(["step", "node", "arc", "probability"], rows))
    print(f"final state at {trace.final.node}:")
    print(text_matrix(trace.final.state.matrix))
    print(f"status: {trace.status}")
    return EXIT_OK


def cmd_enumerate(args, tol: float) -> int:
    model = _load(args.path, tol)
    if isinstance(model, StochasticASM):
        s0 = _initial_snapshot(args, model)
        d = enumerate_classical(model, s0, args.max_steps, args.prune_eps)
        items = sorted(d.masses.items())
        if args.json:
            _emit({
                "schema-version": SCHEMA_VERSION,
                "kind": "classical-enumeration",
                "machine": model.name,
                "initial-snapshot": s0,
                "max-steps": args.max_steps,
                "prune-eps": args.prune_eps,
                "terminal": [{"node": n, "snapshot": s, "mass": m} for (n, s), m in items],
                "residual": d.residual,
            })
        else:
            print(_table(["node", "snapshot", "mass"], [[n, s, f"{m:.6f}"] for (n, s), m in items]))
            print(f"residual: {d.residual:.6f}")
        return EXIT_OK
    rho0, desc = _initial_state(args, model, tol)
    tree = enumerate_runs(model, rho0, args.max_steps, args.prune_eps, tol=tol)
    mixtures = final_mixture(tree, tol, allow_residual=True)
    if args.json:
        _emit({
            "schema-version": SCHEMA_VERSION,
            "kind": "enumeration",
            "automaton": model.name,
            "initial-state": {"description": desc, "matrix": json_matrix(rho0.matrix)},
            "max-steps": args.max_steps,
            "prune-eps": args.prune_eps,
            "leaves": [
                {
                    "node": leaf.config.node,
                    "depth": leaf.depth,
                    "kind": leaf.kind,
                    "mass": leaf.mass,
                    "state": json_matrix(leaf.config.state.matrix),
                }
                for leaf in tree.leaves
            ],
            "residual": tree.residual,
            "suppressed": tree.suppressed,
            "final-mixtures": [
                {"node": n, "mass": m, "state": json_matrix(rho.matrix)} for n, (m, rho) in mixtures.items()
            ],
        })
        return EXIT_OK
    rows = [[str(i), leaf.config.node, leaf.kind, str(leaf.depth), f"{leaf.mass:.6f}"] for i, leaf in enumerate(tree.leaves)]
    print(f"automaton {model.name}: {len(tree.leaves)} leaves")
    print(_table(["leaf", "node", "kind", "depth", "mass"], rows))
    print(f"residual: {tree.residual:.6f}")
    for n, (m, rho) in mixtures.items():
        print(f"final mixture at {n} (mass {m:.6f}):")
        print(text_matrix(rho.matrix))
    return EXIT_OK


def _node_op(model, node: str, path: str):
    if not isinstance(model, AbstractQuantumAutomaton):
        raise QautError(f"{path}: {model.name!r} is a machine, not a quantum automaton")
    if node not in model.graph.nodes:
        raise QautError(f"{path}: unknown node {node!r}")
    if model.graph.is_terminal(node):
        raise QautError(f"{path}: node {node!r} is terminal and carries no operation")
    return model.ops[node]


def cmd_equiv(args, tol: float) -> int:
    eq_tol = args.tol if args.tol is not None else tol
    a = _node_op(_load(args.path_a, tol), args.node, args.path_a)
    b = _node_op(_load(args.path_b, tol), args.node, args.path_b)
    if a.dim != b.dim:
        raise QautError(f"node {args.node!r}: dimensions differ ({a.dim} vs {b.dim})")
    if set(a.outcomes.labels) != set(b.outcomes.labels):
        raise QautError(
            f"node {args.node!r}: outcome sets differ ({list(a.outcomes.labels)} vs {list(b.outcomes.labels)})"
        )
    thetas = phase_equivalent(a, b, eq_tol)
    if thetas is None:
        x = inequivalence_witness(a, b, eq_tol)
        if args.json:
            _emit({"schema-version": SCHEMA_VERSION, "kind": "equivalence", "node": args.node,
                   "verdict": "NOT-EQUIVALENT", "witness": x})
        else:
            print("NOT-EQUIVALENT")
            print(f"witness outcome {x!r}: K_B({x}) is not a phase multiple of K_A({x})")
        return EXIT_NOT_EQUIVALENT
    if args.json:
        _emit({"schema-version": SCHEMA_VERSION, "kind": "equivalence", "node": args.node,
               "verdict": "EQUIVALENT", "theta": thetas})
    else:
        print("EQUIVALENT")
        print(_table(["outcome", "theta"], [[x, f"{t:.6f}"] for x, t in thetas.items()]))
    return EXIT_OK


def cmd_convert(args, tol: float) -> int:
    op = _node_op(_load(args.path, tol), args.node, args.path)
    w = kraus_to_isometry(op.kraus)
    labels = list(op.outcomes.labels)
    if args.to == "isometry":
        if args.json:
            _emit({"schema-version": SCHEMA_VERSION, "kind": "isometry", "node": args.node,
                   "outcomes": labels, "matrix": json_matrix(w.matrix)})
        else:
            print(f"isometry at {args.node}: {w.matrix.shape[0]}x{w.matrix.shape[1]}, blocks in outcome order {labels}")
            print(text_matrix(w.matrix))
        return EXIT_OK
    k = isometry_to_kraus(w)
    if args.json:
        _emit({"schema-version": SCHEMA_VERSION, "kind": "kraus", "node": args.node,
               "blocks": [{"outcome": x, "matrix": json_matrix(k[x])} for x in labels]})
    else:
        for x in labels:
            print(f"K({x!r}):")
            print(text_matrix(k[x]))
    return EXIT_OK


def corpus_files() -> dict[str, object]:
    root = resources.files("qaut") / "corpus"
    return {p.name[: -len(".qaut")]: p for p in sorted(root.iterdir(), key=lambda p: p.name) if p.name.endswith(".qaut")}


def cmd_examples(args, tol: float) -> int:
    files = corpus_files()
    names = args.names or list(files)
    unknown = [n for n in names if n not in files]
    if unknown:
        raise UsageError(f"unknown example(s) {unknown}; available: {list(files)}")
    if args.copy is None:
        for n in names:
            text = files[n].read_text(encoding="utf-8")
            first = next((ln.lstrip("# ").rstrip() for ln in text.splitlines() if ln.startswith("#")), "")
            print(f"{n:<12} {first}")
        return EXIT_OK
    dest = Path(args.copy)
    dest.mkdir(parents=True, exist_ok=True)
    for n in names:
        with resources.as_file(files[n]) as src:
            shutil.copyfile(src, dest / f"{n}.qaut")
        print(dest / f"{n}.qaut")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qaut", description="Validate, run and compare abstract quantum automata.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="parse, elaborate and check a model file")
    v.add_argument("path")
    v.set_defaults(func=cmd_validate)

    def initial_opts(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--initial", metavar="EXPR", help="initial density matrix expression (snapshot label for machines)")
        g.add_argument("--initial-file", metavar="FILE", help="file holding the initial state expression")
        sp.add_argument("--max-steps", type=_positive_int, default=64)

    r = sub.add_parser("run", help="sample one seeded run")
    r.add_argument("path")
    initial_opts(r)
    r.add_argument("--seed", type=int, default=0)
    out = r.add_mutually_exclusive_group()
    out.add_argument("--json", action="store_true", help="emit the trace as JSON")
    out.add_argument("--pretty", action="store_true", help="aligned table (default)")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("enumerate", help="expand every run branch")
    e.add_argument("path")
    initial_opts(e)
    e.add_argument("--prune-eps", type=_nonneg_float, default=0.0)
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_enumerate)

    q = sub.add_parser("equiv", help="decide phase equivalence of two operations at a node")
    q.add_argument("path_a")
    q.add_argument("path_b")
    q.add_argument("--node", required=True)
    q.add_argument("--tol", type=_nonneg_float, default=None)
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_equiv)

    c = sub.add_parser("convert", help="print a node's operation as an isometry or Kraus blocks")
    c.add_argument("path")
    c.add_argument("--node", required=True)
    c.add_argument("--to", choices=("isometry", "kraus"), required=True)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_convert)

    x = sub.add_parser("examples", help="list or copy the bundled example models")
    x.add_argument("names", nargs="*")
    x.add_argument("--copy", metavar="DIR", help="copy the examples into DIR")
    x.set_defaults(func=cmd_examples)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        tol = default_tol()
        return args.func(args, tol)
    except UsageError as e:
        print(f"qaut: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except dsl.DslError as e:
        for d in e.diagnostics:
            print(d, file=sys.stderr)
        return EXIT_MODEL
    except (OSError, UnicodeDecodeError) as e:
        print(f"qaut: {e}", file=sys.stderr)
        return EXIT_IO
    except QautError as e:
        print(f"qaut: error: {e}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
