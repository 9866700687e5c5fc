from __future__ import annotations

from dataclasses import dataclass

from ..errors import QautError


@dataclass(frozen=True, order=True)
class Pos:
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    pos: Pos
    message: str
    lexeme: str = ""
    source: str = "<input>"

    def __str__(self):
        near = f" (near {self.lexeme!r})" if self.lexeme else ""
        return f"{self.source}:{self.pos}: error: {self.message}{near}"

    def with_source(self, source: str) -> "Diagnostic":
        return Diagnostic(self.pos, self.message, self.lexeme, source)


class DslError(QautError):
    """Raised by parse/elaborate; carries every diagnostic collected."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = sorted(diagnostics, key=lambda d: d.pos)
        super().__init__("\n".join(str(d) for d in self.diagnostics))
