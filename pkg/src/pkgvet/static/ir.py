"""Language-neutral program tree shared by the three frontends.

Each frontend lowers its language into this small statement/expression
vocabulary: imports with local bindings, function declarations, calls
with dotted callee paths, assignments (plain and augmenting), returns,
literals, and inline function expressions (lambdas, arrows, blocks).

Control flow is deliberately flattened: branch and loop bodies are
spliced into the enclosing statement list in source order. The taint
pass is flow-insensitive enough that this over-approximation is the
intended behavior, and it keeps all three frontends small.
"""

from __future__ import annotations

from dataclasses import dataclass, field


# --- expressions ---


@dataclass(frozen=True)
class NameRef:
    line: int
    name: str


@dataclass(frozen=True)
class PathRef:
    """Dotted chain of plain names: a.b.c / A::B.c (:: folded to .)."""

    line: int
    parts: tuple

    def dotted(self) -> str:
        return ".".join(self.parts)


@dataclass(frozen=True)
class Literal:
    line: int
    kind: str  # "str" | "num" | "other"
    value: object = None


@dataclass(frozen=True)
class AttrOf:
    """Attribute of a non-path base, e.g. (call()).field."""

    line: int
    base: object
    attr: str


@dataclass(frozen=True)
class CallExpr:
    line: int
    callee: object  # NameRef | PathRef | AttrOf | arbitrary expr
    args: tuple = ()


@dataclass(frozen=True)
class FuncExpr:
    """Inline function: lambda, arrow, function expression, Ruby block."""

    line: int
    params: tuple
    body: tuple  # statements
    name: str | None = None


@dataclass(frozen=True)
class Combine:
    """Value derived from several inputs: concatenation, interpolation,
    arithmetic, boolean selection. Taint of the output is the union."""

    line: int
    parts: tuple


@dataclass(frozen=True)
class ObjectLit:
    line: int
    entries: tuple  # (key or None, expr)


@dataclass(frozen=True)
class Opaque:
    """Anything the frontend does not model."""

    line: int


# --- statements ---


@dataclass(frozen=True)
class ImportStmt:
    """bindings: (local name, dotted remote path). A remote path equal
    to the module name itself binds the whole module."""

    line: int
    module: str
    bindings: tuple


@dataclass(frozen=True)
class AssignStmt:
    line: int
    target: str | None  # simple or dotted name; None when unmodeled
    value: object
    aug: bool = False  # x += v unions into existing taint


@dataclass(frozen=True)
class ExprStmt:
    line: int
    value: object


@dataclass(frozen=True)
class ReturnStmt:
    line: int
    value: object | None


@dataclass(frozen=True)
class FuncDecl:
    line: int
    name: str
    params: tuple
    body: tuple
    exported: bool = False


@dataclass(frozen=True)
class Unit:
    """One parsed source file."""

    path: str
    language: str  # SubjectLanguage value
    body: tuple = ()
    parse_error: str | None = None
    extra_exports: tuple = ()  # export names assigned outside FuncDecl


def walk_expressions(stmts):
    """Yield every expression in a statement list, including nested
    function bodies. Used by usage extraction."""
    for stmt in stmts:
        if isinstance(stmt, (ExprStmt, ReturnStmt)):
            if stmt.value is not None:
                yield from _walk_expr(stmt.value)
        elif isinstance(stmt, AssignStmt):
            yield from _walk_expr(stmt.value)
        elif isinstance(stmt, FuncDecl):
            yield from walk_expressions(stmt.body)


def _walk_expr(expr):
    yield expr
    if isinstance(expr, CallExpr):
        yield from _walk_expr(expr.callee)
        for arg in expr.args:
            yield from _walk_expr(arg)
    elif isinstance(expr, AttrOf):
        yield from _walk_expr(expr.base)
    elif isinstance(expr, Combine):
        for part in expr.parts:
            yield from _walk_expr(part)
    elif isinstance(expr, ObjectLit):
        for _, value in expr.entries:
            yield from _walk_expr(value)
    elif isinstance(expr, FuncExpr):
        yield from walk_expressions(expr.body)
