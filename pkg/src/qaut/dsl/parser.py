"""Recursive-descent parser for ``.qaut`` documents.

Errors inside a declaration are recorded and the parser resynchronises at the
next declaration keyword of the model body, so one pass reports every
independent mistake.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ast
from .diagnostics import Diagnostic, DslError, Pos
from .lexer import KEYWORDS, Tok, Token, tokenize

DECL_KEYWORDS = frozenset({"dim", "node", "arc", "op", "init", "snapshots", "prob", "map"})
SCALAR_FUNCS = frozenset({"sqrt", "exp"})
MATRIX_FUNCS = frozenset({"identity", "kron", "matmul", "adjoint", "scale", "ket", "proj", "pure"})


@dataclass(frozen=True)
class SourceDoc:
    text: str
    name: str = "<input>"


class _Abort(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag


class Parser:
    def __init__(self, tokens: list[Token], source: str = "<input>"):
        self.toks = tokens
        self.i = 0
        self.depth = 0
        self.source = source
        self.diags: list[Diagnostic] = []

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.tok
        if t.kind is not Tok.EOF:
            if t.is_("{"):
                self.depth += 1
            elif t.is_("}"):
                self.depth -= 1
            self.i += 1
        return t

    def error(self, message: str, tok: Token | None = None, pos: Pos | None = None, lexeme: str | None = None):
        tok = tok or self.tok
        raise _Abort(Diagnostic(pos or tok.pos, message, tok.text if lexeme is None else lexeme, self.source))

    def expect(self, text: str, what: str | None = None) -> Token:
        if self.tok.kind in (Tok.PUNCT, Tok.IDENT) and self.tok.text == text:
            return self.advance()
        self.error(f"expected {what or repr(text)}, found {self.tok.describe()}")

    def accept(self, text: str) -> Token | None:
        if self.tok.kind in (Tok.PUNCT, Tok.IDENT) and self.tok.text == text:
            return self.advance()
        return None

    def name(self, what: str) -> Token:
        t = self.tok
        if t.kind is Tok.IDENT and t.text not in KEYWORDS:
            return self.advance()
        if t.kind is Tok.IDENT:
            self.error(f"expected {what}, found keyword {t.text!r}")
        self.error(f"expected {what}, found {t.describe()}")

    def label(self, what: str) -> Token:
        """Arc ids and snapshot labels: identifier, digits or quoted string."""
        t = self.tok
        if t.kind is Tok.STRING:
            return self.advance()
        if t.kind is Tok.NUMBER and t.text.isdigit():
            return self.advance()
        return self.name(what)

    # document
    def parse_document(self) -> ast.SpecAst | None:
        head = self.tok
        if not (head.kind is Tok.IDENT and head.text in ("automaton", "machine")):
            self.diags.append(Diagnostic(head.pos, f"expected 'automaton' or 'machine', found {head.describe()}", head.text, self.source))
            return None
        self.advance()
        try:
            name = self.name("model name")
            self.expect("{")
        except _Abort as e:
            self.diags.append(e.diag)
            return None
        doc = ast.SpecAst(head.text, name.text, head.pos, self.source)
        body_depth = self.depth
        while True:
            t = self.tok
            if t.kind is Tok.EOF:
                self.diags.append(Diagnostic(t.pos, f"expected '}}' to close {doc.kind} {doc.name!r}", "", self.source))
                return doc
            if t.is_("}") and self.depth == body_depth:
                self.advance()
                break
            start = self.i
            try:
                self.declaration(doc)
            except _Abort as e:
                self.diags.append(e.diag)
                if self.i == start:
                    self.advance()
                self.sync(body_depth)
        if self.tok.kind is not Tok.EOF:
            self.diags.append(Diagnostic(self.tok.pos, "only one model per file; unexpected text after closing '}'", self.tok.text, self.source))
        return doc

    def sync(self, body_depth: int):
        while self.tok.kind is not Tok.EOF:
            if self.depth == body_depth and (
                self.tok.is_("}") or (self.tok.kind is Tok.IDENT and self.tok.text in DECL_KEYWORDS)
            ):
                return
            if self.depth < body_depth:
                return
            self.advance()

    def declaration(self, doc: ast.SpecAst):
        t = self.tok
        kw = t.text if t.kind is Tok.IDENT else None
        automaton_only = {"dim", "op"}
        machine_only = {"snapshots", "prob", "map"}
        if kw not in DECL_KEYWORDS:
            self.error(f"expected a declaration ({', '.join(sorted(DECL_KEYWORDS))}), found {t.describe()}")
        if doc.kind == "automaton" and kw in machine_only or doc.kind == "machine" and kw in automaton_only:
            self.error(f"{kw!r} is not allowed in a {doc.kind}")
        getattr(self, f"decl_{kw}")(doc)

    def decl_dim(self, doc):
        kw = self.advance()
        self.expect("=")
        t = self.tok
        if t.kind is not Tok.NUMBER or not t.text.isdigit():
            self.error(f"expected an integer dimension, found {t.describe()}")
        self.advance()
        if doc.dim is not None:
            self.error("dimension declared twice", kw)
        doc.dim, doc.dim_pos = int(t.text), t.pos

    def decl_node(self, doc):
        self.advance()
        name = self.name("node name")
        initial = terminal = False
        while self.tok.kind is Tok.IDENT and self.tok.text in ("initial", "terminal"):
            flag = self.advance().text
            if flag == "initial":
                initial = True
            else:
                terminal = True
        doc.nodes.append(ast.NodeDecl(name.text, initial, terminal, name.pos))

    def decl_arc(self, doc):
        self.advance()
        arc = self.label("arc id")
        self.expect(":")
        dom = self.name("source node")
        self.expect("->")
        codom = self.name("target node")
        doc.arcs.append(ast.ArcDecl(arc.value, dom.text, codom.text, arc.pos))

    def decl_op(self, doc):
        self.advance()
        node = self.name("node name")
        self.expect("{")
        blocks = []
        while not self.tok.is_("}"):
            k = self.tok
            if not k.is_("K"):
                self.error(f"expected 'K(\"outcome\") = ...' or '}}', found {k.describe()}")
            self.advance()
            self.expect("(")
            lab = self.tok
            if lab.kind is not Tok.STRING:
                self.error(f"expected a quoted outcome label, found {lab.describe()}")
            self.advance()
            self.expect(")")
            self.expect("=")
            expr = self.matrix_expr()
            blocks.append(ast.KrausDecl(lab.value, expr, lab.pos))
        self.expect("}")
        doc.ops.append(ast.OpDecl(node.text, tuple(blocks), node.pos))

    def decl_init(self, doc):
        kw = self.advance()
        self.expect("=")
        start = self.tok
        value = self.label("initial snapshot").value if doc.kind == "machine" else self.matrix_expr()
        if doc.init is not None:
            self.error("initial state declared twice", kw)
        doc.init, doc.init_pos = value, start.pos

    def decl_snapshots(self, doc):
        kw = self.advance()
        self.expect("{")
        labels = [self.label("snapshot label").value]
        while self.accept(","):
            if self.tok.is_("}"):
                break
            labels.append(self.label("snapshot label").value)
        self.expect("}", "',' or '}'")
        if doc.snapshots:
            self.error("snapshots declared twice", kw)
        doc.snapshots, doc.snapshots_pos = tuple(labels), kw.pos

    def decl_prob(self, doc):
        kw = self.advance()
        self.expect("(")
        node = self.name("node name")
        self.expect(",")
        snap = self.label("snapshot label")
        self.expect(")")
        self.expect("{")
        entries = []
        while not self.tok.is_("}"):
            arc = self.label("arc id")
            self.expect(":")
            entries.append((arc.value, self.scalar(), arc.pos))
            if not self.accept(","):
                if not self.tok.is_("}") and self.tok.kind not in (Tok.IDENT, Tok.STRING, Tok.NUMBER):
                    self.error(f"expected ',' or '}}', found {self.tok.describe()}")
        self.expect("}")
        doc.probs.append(ast.ProbDecl(node.text, snap.value, tuple(entries), kw.pos))

    def decl_map(self, doc):
        kw = self.advance()
        self.expect("(")
        arc = self.label("arc id")
        self.expect(")")
        self.expect("{")
        entries = []
        while not self.tok.is_("}"):
            src = self.label("snapshot label")
            self.expect("->")
            dst = self.label("snapshot label")
            entries.append((src.value, dst.value, src.pos))
            self.accept(",")
        self.expect("}")
        doc.maps.append(ast.MapDecl(arc.value, tuple(entries), kw.pos))

    # matrix expressions
    def matrix_expr(self):
        t = self.tok
        if t.is_("["):
            return self.literal()
        if t.kind is Tok.IDENT and t.text not in KEYWORDS:
            self.advance()
            if self.tok.is_("("):
                return self.call(t)
            return ast.Const(t.text, t.pos)
        self.error(f"expected a matrix expression, found {t.describe()}")

    def literal(self):
        open_ = self.advance()
        rows = [self.row()]
        while True:
            if self.accept("]"):
                break
            if self.accept(","):
                rows.append(self.row())
                continue
            self.error(f"unclosed '[': expected ',' or ']' but found {self.tok.describe()}", pos=open_.pos, lexeme="[")
        return ast.Literal(tuple(rows), open_.pos)

    def row(self):
        open_ = self.tok
        if not open_.is_("["):
            self.error(f"expected '[' to start a matrix row, found {open_.describe()}")
        self.advance()
        items = [self.scalar()]
        while True:
            if self.accept("]"):
                break
            if self.accept(","):
                items.append(self.scalar())
                continue
            self.error(f"unclosed '[': expected ',' or ']' but found {self.tok.describe()}", pos=open_.pos, lexeme="[")
        return tuple(items)

    def call(self, fn: Token):
        if fn.text not in MATRIX_FUNCS:
            self.error(f"unknown function {fn.text!r}", fn)
        self.expect("(")
        args = []
        if not self.tok.is_(")"):
            args.append(self.argument(fn.text, 0))
            while self.accept(","):
                args.append(self.argument(fn.text, len(args)))
        self.expect(")", "',' or ')'")
        return ast.Call(fn.text, tuple(args), fn.pos)

    def argument(self, fn: str, index: int):
        t = self.tok
        if fn in ("ket", "proj"):
            if t.kind is not Tok.STRING:
                self.error(f"{fn} expects a quoted bit string, found {t.describe()}")
            self.advance()
            return ast.Str(t.value, t.pos)
        if fn == "identity":
            if t.kind is not Tok.NUMBER or not t.text.isdigit():
                self.error(f"identity expects an integer size, found {t.describe()}")
            self.advance()
            return ast.Int(int(t.text), t.pos)
        if fn == "scale" and index == 0:
            return self.scalar()
        return self.matrix_expr()

    # scalar expressions
    def scalar(self):
        left = self.product()
        while self.tok.is_("+") or self.tok.is_("-"):
            op = self.advance()
            left = ast.BinOp(op.text, left, self.product(), op.pos)
        return left

    def product(self):
        left = self.unary()
        while self.tok.is_("*") or self.tok.is_("/"):
            op = self.advance()
            left = ast.BinOp(op.text, left, self.unary(), op.pos)
        return left

    def unary(self):
        if self.tok.is_("-"):
            op = self.advance()
            return ast.Neg(self.unary(), op.pos)
        if self.tok.is_("+"):
            self.advance()
            return self.unary()
        return self.atom()

    def atom(self):
        t = self.tok
        if t.kind is Tok.NUMBER:
            self.advance()
            return ast.Num(complex(float(t.text), 0.0), t.pos)
        if t.kind is Tok.IMAG:
            self.advance()
            return ast.Num(complex(0.0, float(t.text[:-1])), t.pos)
        if t.kind is Tok.IDENT and t.text == "i":
            self.advance()
            return ast.Num(1j, t.pos)
        if t.kind is Tok.IDENT and t.text == "pi":
            self.advance()
            return ast.Num(complex(3.141592653589793, 0.0), t.pos)
        if t.kind is Tok.IDENT and t.text in SCALAR_FUNCS:
            self.advance()
            self.expect("(")
            arg = self.scalar()
            self.expect(")")
            return ast.Func(t.text, arg, t.pos)
        if t.is_("("):
            self.advance()
            inner = self.scalar()
            self.expect(")")
            return inner
        self.error(f"expected a number, found {t.describe()}")


def parse(doc: SourceDoc | str) -> ast.SpecAst:
    """Parse a document, raising :class:`DslError` with all diagnostics on failure."""
    if isinstance(doc, str):
        doc = SourceDoc(doc)
    tokens, lex_diags = tokenize(doc.text)
    p = Parser(tokens, doc.name)
    tree = p.parse_document()
    diags = [d.with_source(doc.name) for d in lex_diags] + p.diags
    if diags or tree is None:
        raise DslError(diags)
    return tree


def parse_matrix_expr(text: str, source: str = "<expr>"):
    """Parse a standalone matrix expression such as a ``--initial`` argument."""
    tokens, lex_diags = tokenize(text)
    p = Parser(tokens, source)
    diags = [d.with_source(source) for d in lex_diags]
    expr = None
    try:
        expr = p.matrix_expr()
        if p.tok.kind is not Tok.EOF:
            p.error(f"unexpected {p.tok.describe()} after expression")
    except _Abort as e:
        diags.append(e.diag)
    if diags:
        raise DslError(diags)
    return expr
