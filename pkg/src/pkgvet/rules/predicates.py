"""Tiny predicate language for heuristic rules.

    <field> <op> <literal>, joined with AND / OR, grouped with parens.

Fields name values in the evaluation context ("meta.typosquat_count"),
ops are ==, !=, >, >=, <, <= and contains. Literals are numbers,
double-quoted strings, or true/false. The grammar is validated at load
time against the field schema, so a rule file with a typo fails the
config step instead of silently never firing.
"""

from __future__ import annotations

import re

from pkgvet.errors import ConfigInvalidError

# field -> type; "set" holds strings and supports only `contains`
FIELDS = {
    "meta.typosquat_count": "int",
    "meta.cross_registry_count": "int",
    "meta.relations": "set",
    "meta.binary_count": "int",
    "static.has_install_hook": "bool",
    "static.added_categories": "set",
    "static.flow_pairs": "set",
    "dynamic.unexpected_endpoint_count": "int",
    "dynamic.sensitive_read_count": "int",
    "dynamic.sensitive_write_count": "int",
    "dynamic.unexpected_process_count": "int",
}

_NUM_OPS = ("==", "!=", ">=", "<=", ">", "<")
_BOOL_OPS = ("==", "!=")

_TOKEN = re.compile(
    r"\s*(?:(?P<lparen>\()|(?P<rparen>\))|(?P<op>==|!=|>=|<=|>|<)"
    r"|(?P<str>\"[^\"]*\")|(?P<num>-?\d+(?:\.\d+)?)"
    r"|(?P<word>[A-Za-z_][A-Za-z0-9_.]*))"
)


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            rest = text[pos:].strip()
            if not rest:
                break
            raise ConfigInvalidError(f"cannot tokenize predicate at: {rest[:30]!r}")
        pos = m.end()
        if m.lastgroup == "lparen":
            tokens.append(("punct", "("))
        elif m.lastgroup == "rparen":
            tokens.append(("punct", ")"))
        elif m.lastgroup == "op":
            tokens.append(("op", m.group("op")))
        elif m.lastgroup == "str":
            tokens.append(("str", m.group("str")[1:-1]))
        elif m.lastgroup == "num":
            raw = m.group("num")
            tokens.append(("num", float(raw) if "." in raw else int(raw)))
        else:
            word = m.group("word")
            lowered = word.lower()
            if lowered in ("and", "or"):
                tokens.append(("join", lowered.upper()))
            elif lowered == "contains":
                tokens.append(("op", "contains"))
            elif lowered in ("true", "false"):
                tokens.append(("bool", lowered == "true"))
            else:
                tokens.append(("field", word))
    return tokens


class _Comparison:
    __slots__ = ("field", "op", "literal")

    def __init__(self, field, op, literal):
        self.field = field
        self.op = op
        self.literal = literal

    def evaluate(self, context: dict) -> bool:
        value = context[self.field]
        op = self.op
        if op == "contains":
            return self.literal in value
        if op == "==":
            return value == self.literal
        if op == "!=":
            return value != self.literal
        if op == ">":
            return value > self.literal
        if op == ">=":
            return value >= self.literal
        if op == "<":
            return value < self.literal
        return value <= self.literal

    def fields(self):
        return {self.field}


class _Junction:
    __slots__ = ("kind", "parts")

    def __init__(self, kind, parts):
        self.kind = kind
        self.parts = parts

    def evaluate(self, context: dict) -> bool:
        if self.kind == "AND":
            return all(p.evaluate(context) for p in self.parts)
        return any(p.evaluate(context) for p in self.parts)

    def fields(self):
        out = set()
        for p in self.parts:
            out |= p.fields()
        return out


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else ("eof", None)

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self):
        node = self.or_expr()
        if self.peek()[0] != "eof":
            raise ConfigInvalidError(f"trailing tokens in predicate: {self.peek()[1]!r}")
        return node

    def or_expr(self):
        parts = [self.and_expr()]
        while self.peek() == ("join", "OR"):
            self.next()
            parts.append(self.and_expr())
        return parts[0] if len(parts) == 1 else _Junction("OR", parts)

    def and_expr(self):
        parts = [self.atom()]
        while self.peek() == ("join", "AND"):
            self.next()
            parts.append(self.atom())
        return parts[0] if len(parts) == 1 else _Junction("AND", parts)

    def atom(self):
        kind, value = self.peek()
        if (kind, value) == ("punct", "("):
            self.next()
            node = self.or_expr()
            if self.next() != ("punct", ")"):
                raise ConfigInvalidError("missing closing paren in predicate")
            return node
        if kind != "field":
            raise ConfigInvalidError(f"expected a field name, got {value!r}")
        self.next()
        field = value
        if field not in FIELDS:
            raise ConfigInvalidError(f"unknown field {field!r}")
        op_kind, op = self.next()
        if op_kind != "op":
            raise ConfigInvalidError(f"expected an operator after {field}, got {op!r}")
        lit_kind, literal = self.next()
        if lit_kind not in ("str", "num", "bool"):
            raise ConfigInvalidError(f"expected a literal after {field} {op}, got {literal!r}")
        self._check_types(field, op, lit_kind)
        return _Comparison(field, op, literal)

    @staticmethod
    def _check_types(field, op, lit_kind):
        ftype = FIELDS[field]
        if ftype == "set":
            if op != "contains":
                raise ConfigInvalidError(f"{field} is a set; only 'contains' applies")
            if lit_kind != "str":
                raise ConfigInvalidError(f"{field} contains needs a string literal")
        elif ftype == "bool":
            if op not in _BOOL_OPS:
                raise ConfigInvalidError(f"{field} is boolean; use == or !=")
            if lit_kind != "bool":
                raise ConfigInvalidError(f"{field} compares against true/false")
        else:
            if op == "contains":
                raise ConfigInvalidError(f"{field} is numeric; 'contains' does not apply")
            if lit_kind != "num":
                raise ConfigInvalidError(f"{field} compares against a number")


def compile_predicate(text: str):
    """Parse and type-check; the result evaluates against a context dict."""
    if not text or not text.strip():
        raise ConfigInvalidError("empty predicate")
    return _Parser(_tokenize(text)).parse()


def empty_context() -> dict:
    """A context in which no well-formed predicate can fire."""
    ctx = {}
    for field, ftype in FIELDS.items():
        if ftype == "int":
            ctx[field] = 0
        elif ftype == "bool":
            ctx[field] = False
        else:
            ctx[field] = frozenset()
    return ctx
