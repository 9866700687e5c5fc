"""Evaluation of scalar and matrix expressions."""

from __future__ import annotations

import cmath
import math

import numpy as np

from .. import linalg
from . import ast
from .diagnostics import Diagnostic, Pos

_S = 1 / math.sqrt(2)

CONSTANTS = {
    "H": np.array([[_S, _S], [_S, -_S]], dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128),
}


class EvalError(Exception):
    def __init__(self, pos: Pos, message: str, lexeme: str = ""):
        super().__init__(message)
        self.pos = pos
        self.message = message
        self.lexeme = lexeme

    def diagnostic(self, source: str) -> Diagnostic:
        return Diagnostic(self.pos, self.message, self.lexeme, source)


def eval_scalar(e) -> complex:
    if isinstance(e, ast.Num):
        return e.value
    if isinstance(e, ast.Neg):
        return -eval_scalar(e.operand)
    if isinstance(e, ast.BinOp):
        a, b = eval_scalar(e.left), eval_scalar(e.right)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0:
            raise EvalError(e.pos, "division by zero", "/")
        return a / b
    if isinstance(e, ast.Func):
        x = eval_scalar(e.arg)
        if e.name == "sqrt":
            if x.imag == 0 and x.real >= 0:
                return complex(math.sqrt(x.real), 0.0)
            return cmath.sqrt(x)
        if e.name == "exp":
            return cmath.exp(x)
    raise EvalError(getattr(e, "pos", Pos(0, 0)), f"cannot evaluate {type(e).__name__} as a number")


def _bits(arg: ast.Str, fn: str) -> str:
    if not arg.value or any(c not in "01" for c in arg.value):
        raise EvalError(arg.pos, f"{fn} expects a non-empty string of 0/1 digits, got {arg.value!r}", arg.value)
    return arg.value


def _arity(e: ast.Call, lo: int, hi: int | None = None):
    hi = lo if hi is None else hi
    n = len(e.args)
    if n < lo or (hi >= 0 and n > hi):
        want = f"{lo}" if lo == hi else (f"at least {lo}" if hi < 0 else f"{lo}-{hi}")
        raise EvalError(e.pos, f"{e.name} takes {want} argument(s), got {n}", e.name)


def eval_matrix(e) -> np.ndarray:
    """Evaluate a matrix expression bottom-up with dimension checks."""
    if isinstance(e, ast.Literal):
        widths = {len(r) for r in e.rows}
        if len(widths) != 1:
            raise EvalError(e.pos, f"ragged matrix literal: row lengths {sorted(widths)}", "[")
        return linalg.as_matrix([[eval_scalar(x) for x in row] for row in e.rows])
    if isinstance(e, ast.Const):
        if e.name not in CONSTANTS:
            raise EvalError(e.pos, f"unknown matrix constant {e.name!r}; known: {', '.join(CONSTANTS)}", e.name)
        return linalg.as_matrix(CONSTANTS[e.name])
    if isinstance(e, ast.Call):
        name = e.name
        if name == "identity":
            _arity(e, 1)
            n = e.args[0].value
            if n < 1:
                raise EvalError(e.args[0].pos, "identity size must be positive", str(n))
            return linalg.identity(n)
        if name == "ket":
            _arity(e, 1)
            bits = _bits(e.args[0], "ket")
            return linalg.basis_vector(2 ** len(bits), int(bits, 2))
        if name == "proj":
            _arity(e, 1)
            bits = _bits(e.args[0], "proj")
            v = linalg.basis_vector(2 ** len(bits), int(bits, 2))
            return linalg.outer(v, v)
        if name == "pure":
            _arity(e, 1)
            v = eval_matrix(e.args[0])
            if v.shape[1] != 1:
                raise EvalError(e.pos, f"pure expects a column vector, got {v.shape[0]}x{v.shape[1]}", "pure")
            return linalg.outer(v, v)
        if name == "adjoint":
            _arity(e, 1)
            return linalg.adjoint(eval_matrix(e.args[0]))
        if name == "scale":
            _arity(e, 2)
            return linalg.as_matrix(eval_scalar(e.args[0]) * np.asarray(eval_matrix(e.args[1])))
        if name in ("kron", "matmul"):
            _arity(e, 2, -1)
            acc = eval_matrix(e.args[0])
            for arg in e.args[1:]:
                m = eval_matrix(arg)
                if name == "kron":
                    acc = linalg.kron(acc, m)
                else:
                    if acc.shape[1] != m.shape[0]:
                        raise EvalError(
                            arg.pos,
                            f"matmul dimension mismatch: {acc.shape[0]}x{acc.shape[1]} times {m.shape[0]}x{m.shape[1]}",
                            name,
                        )
                    acc = linalg.matmul(acc, m)
            return acc
        raise EvalError(e.pos, f"unknown function {name!r}", name)
    raise EvalError(getattr(e, "pos", Pos(0, 0)), f"expected a matrix expression, got {type(e).__name__}")
