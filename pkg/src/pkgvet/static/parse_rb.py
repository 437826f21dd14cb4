"""Ruby frontend: best-effort tokenizer and recursive descent.

Covers requires, def/end methods (top level and inside class/module,
which prefix the name), assignments including +=, calls with and
without parentheses, Const::path chains (:: folds to .), do |x| ... end
and { |x| ... } blocks as trailing function arguments, string
interpolation, and implicit returns (a method's trailing expression is
treated as its return value). Control flow flattens; unmodeled syntax
degrades to Opaque.
"""

from __future__ import annotations

import re

from pkgvet.static import ir


class RbParseError(Exception):
    pass


_KEYWORDS = {
    "def", "end", "if", "elsif", "else", "unless", "while", "until", "case",
    "when", "then", "do", "return", "class", "module", "begin", "rescue",
    "ensure", "yield", "require", "require_relative", "true", "false", "nil",
    "self", "and", "or", "not", "break", "next", "raise", "lambda", "proc",
}

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*[?!]?")
_NUM = re.compile(r"\d+(\.\d+)?")
_PUNCT = [
    "<<~", "<<-", "===", "==", "!=", "<=>", "<=", ">=", "&&", "||", "+=", "-=",
    "*=", "/=", "::", "=>", "->", "(", ")", "[", "]", "{", "}", ",", ".", ";",
    "=", "+", "-", "*", "/", "%", "<", ">", "!", "&", "|", "?", ":", "@", "#",
]


class Token:
    __slots__ = ("kind", "value", "line")

    def __init__(self, kind, value, line):
        self.kind = kind  # name | const | kw | str | sym | num | punct | nl | eof
        self.value = value
        self.line = line

    def __repr__(self):
        return f"Token({self.kind},{self.value!r},{self.line})"


def tokenize(text: str):
    tokens = []
    i = 0
    line = 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            tokens.append(Token("nl", "\n", line))
            line += 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            continue
        if ch == "#" and not text.startswith("#{", i):
            j = text.find("\n", i)
            i = n if j == -1 else j
            continue
        if ch in "'\"":
            start_line = line
            j = i + 1
            parts = []
            buf = []
            while j < n:
                c = text[j]
                if c == "\\" and j + 1 < n:
                    buf.append(text[j + 1])
                    j += 2
                    continue
                if c == ch:
                    break
                if ch == '"' and text.startswith("#{", j):
                    parts.append(("str", "".join(buf)))
                    buf = []
                    depth = 1
                    k = j + 2
                    start = k
                    while k < n and depth:
                        if text[k] == "{":
                            depth += 1
                        elif text[k] == "}":
                            depth -= 1
                        k += 1
                    parts.append(("expr", text[start : k - 1]))
                    j = k
                    continue
                if c == "\n":
                    line += 1
                buf.append(c)
                j += 1
            if j >= n:
                raise RbParseError(f"line {start_line}: unterminated string")
            parts.append(("str", "".join(buf)))
            if len(parts) == 1:
                tokens.append(Token("str", parts[0][1], start_line))
            else:
                tokens.append(Token("istr", parts, start_line))
            i = j + 1
            continue
        if ch == ":" and i + 1 < n and _NAME.match(text, i + 1) and not text.startswith("::", i):
            m = _NAME.match(text, i + 1)
            tokens.append(Token("sym", m.group(0), line))
            i = m.end()
            continue
        if ch == "%" and i + 1 < n and text[i + 1] in "wWiI(":
            # %w(...) word arrays: treat as one literal
            open_ch = text[i + 2] if text[i + 1] in "wWiI" else text[i + 1]
            close_ch = {"(": ")", "[": "]", "{": "}", "<": ">"}.get(open_ch, open_ch)
            j = text.find(close_ch, i + 2)
            if j == -1:
                raise RbParseError(f"line {line}: unterminated % literal")
            tokens.append(Token("str", text[i : j + 1], line))
            line += text.count("\n", i, j)
            i = j + 1
            continue
        m = _NAME.match(text, i)
        if m:
            word = m.group(0)
            if word in _KEYWORDS:
                kind = "kw"
            elif word[0].isupper():
                kind = "const"
            else:
                kind = "name"
            tokens.append(Token(kind, word, line))
            i = m.end()
            continue
        m = _NUM.match(text, i)
        if m:
            tokens.append(Token("num", m.group(0), line))
            i = m.end()
            continue
        if ch == "@":
            m = _NAME.match(text, i + 1)
            if m:
                tokens.append(Token("name", "@" + m.group(0), line))
                i = m.end()
                continue
        for p in _PUNCT:
            if text.startswith(p, i):
                if p in ("<<~", "<<-"):
                    # heredoc: consume up to the terminator line
                    m2 = re.match(r"<<[~-]([A-Z_]+)", text[i:])
                    if m2:
                        term = m2.group(1)
                        j = text.find("\n", i)
                        end = re.search(rf"^\s*{term}\s*$", text[j:], re.M) if j != -1 else None
                        if end and j != -1:
                            content = text[j : j + end.start()]
                            tokens.append(Token("str", content, line))
                            line += text.count("\n", i, j + end.end())
                            i = j + end.end()
                            break
                tokens.append(Token("punct", p, line))
                i += len(p)
                break
        else:
            raise RbParseError(f"line {line}: unexpected character {ch!r}")
    tokens.append(Token("eof", "", line))
    return tokens


_EXPR_STARTERS = ("name", "const", "str", "istr", "sym", "num")

_BLOCK_KW_OPENERS = {"if", "unless", "while", "until", "case", "begin", "class", "module", "def", "do"}


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self, offset=0):
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, kind, value=None):
        tok = self.peek()
        return tok.kind == kind and (value is None or tok.value == value)

    def eat(self, kind, value=None):
        if self.at(kind, value):
            return self.next()
        return None

    def skip_newlines(self):
        while self.at("nl") or self.at("punct", ";"):
            self.next()

    def parse_program(self):
        body = self.statements(until=("eof",))
        return body

    def statements(self, until, prefix=""):
        out = []
        self.skip_newlines()
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                break
            if tok.kind == "kw" and tok.value in until:
                break
            out.extend(self.statement(prefix))
            self.skip_newlines()
        return out

    def statement(self, prefix=""):
        tok = self.peek()
        if tok.kind == "kw":
            if tok.value in ("require", "require_relative"):
                self.next()
                arg = self.expression()
                module = arg.value if isinstance(arg, ir.Literal) and arg.kind == "str" else ""
                return [ir.ImportStmt(line=tok.line, module=module, bindings=())]
            if tok.value == "def":
                return [self.def_stmt(prefix)]
            if tok.value in ("class", "module"):
                return self.class_stmt(prefix)
            if tok.value == "return":
                self.next()
                if self.at("nl") or self.at("eof") or self.at("kw", "end"):
                    return [ir.ReturnStmt(line=tok.line, value=None)]
                return [ir.ReturnStmt(line=tok.line, value=self.expression())]
            if tok.value in ("if", "unless", "while", "until"):
                self.next()
                cond = self.expression()
                self.eat("kw", "then")
                body = self.statements(until=("end", "else", "elsif"), prefix=prefix)
                out = [ir.ExprStmt(line=tok.line, value=cond)] + body
                while self.at("kw", "elsif"):
                    self.next()
                    out.append(ir.ExprStmt(line=self.peek().line, value=self.expression()))
                    self.eat("kw", "then")
                    out.extend(self.statements(until=("end", "else", "elsif"), prefix=prefix))
                if self.eat("kw", "else"):
                    out.extend(self.statements(until=("end",), prefix=prefix))
                self.eat("kw", "end")
                return out
            if tok.value == "case":
                self.next()
                out = [ir.ExprStmt(line=tok.line, value=self.expression())]
                while True:
                    self.skip_newlines()
                    if self.eat("kw", "when"):
                        out.append(ir.ExprStmt(line=self.peek().line, value=self.expression()))
                        self.eat("kw", "then")
                        out.extend(self.statements(until=("when", "else", "end"), prefix=prefix))
                    elif self.eat("kw", "else"):
                        out.extend(self.statements(until=("end",), prefix=prefix))
                    else:
                        break
                self.eat("kw", "end")
                return out
            if tok.value == "begin":
                self.next()
                out = self.statements(until=("rescue", "ensure", "end"), prefix=prefix)
                while self.at("kw", "rescue"):
                    self.next()
                    while not self.at("nl") and not self.at("eof"):
                        self.next()
                    out.extend(self.statements(until=("rescue", "ensure", "end"), prefix=prefix))
                if self.eat("kw", "ensure"):
                    out.extend(self.statements(until=("end",), prefix=prefix))
                self.eat("kw", "end")
                return out
            if tok.value in ("break", "next"):
                self.next()
                return []
            if tok.value == "raise":
                self.next()
                if self.at("nl") or self.at("eof"):
                    return []
                return [ir.ExprStmt(line=tok.line, value=self.expression())]
            if tok.value == "yield":
                self.next()
                args = []
                while not self.at("nl") and not self.at("eof") and not self.at("kw", "end"):
                    args.append(self.expression())
                    if not self.eat("punct", ","):
                        break
                return [ir.ExprStmt(line=tok.line, value=ir.Combine(line=tok.line, parts=tuple(args)) if args else ir.Opaque(line=tok.line))]
        # assignment or expression
        expr = self.expression()
        if self.at("punct", "=") and not self.at("punct", "=="):
            self.next()
            value = self.expression()
            target = _expr_to_target(expr)
            # trailing modifier: x = y if cond
            self.drain_modifier()
            return [ir.AssignStmt(line=tok.line, target=target, value=value)]
        if self.peek().kind == "punct" and self.peek().value in ("+=", "-=", "*=", "/="):
            aug_tok = self.next()
            value = self.expression()
            self.drain_modifier()
            return [ir.AssignStmt(line=tok.line, target=_expr_to_target(expr), value=value, aug=True)]
        self.drain_modifier()
        return [ir.ExprStmt(line=tok.line, value=expr)]

    def drain_modifier(self):
        # statement modifiers: `expr if cond`, `expr unless cond`
        if self.peek().kind == "kw" and self.peek().value in ("if", "unless", "while", "until"):
            self.next()
            self.expression()

    def def_stmt(self, prefix):
        tok = self.next()  # def
        name_parts = []
        # def self.method / def Const.method
        first = self.next()
        if first.kind in ("name", "const", "kw"):
            name_parts.append(first.value)
        if self.eat("punct", ".") :
            second = self.next()
            name_parts.append(second.value)
        name = name_parts[-1]
        if name_parts[0] == "self" or (prefix and len(name_parts) == 1):
            qual = prefix + name
        elif len(name_parts) == 2:
            qual = prefix + name
        else:
            qual = prefix + name
        params = []
        if self.eat("punct", "("):
            while not self.at("punct", ")") and not self.at("eof"):
                p = self.next()
                if p.kind == "name":
                    params.append(p.value)
                    if self.eat("punct", "="):
                        self.expression()
                self.eat("punct", ",")
            self.eat("punct", ")")
        else:
            while self.at("name"):
                params.append(self.next().value)
                if not self.eat("punct", ","):
                    break
        body = self.statements(until=("end", "rescue", "ensure"), prefix="")
        while self.at("kw", "rescue"):
            self.next()
            while not self.at("nl") and not self.at("eof"):
                self.next()
            body.extend(self.statements(until=("end", "rescue", "ensure"), prefix=""))
        if self.eat("kw", "ensure"):
            body.extend(self.statements(until=("end",), prefix=""))
        self.eat("kw", "end")
        body = _implicit_return(body)
        return ir.FuncDecl(line=tok.line, name=qual, params=tuple(params), body=tuple(body), exported=True)

    def class_stmt(self, prefix):
        tok = self.next()  # class/module
        name = self.next().value if self.peek().kind in ("const", "name") else ""
        while self.eat("punct", "::"):
            name += "." + self.next().value
        if self.eat("punct", "<"):
            self.expression()
        body = self.statements(until=("end",), prefix=f"{prefix}{name}." if name else prefix)
        self.eat("kw", "end")
        return body

    # --- expressions ---

    def expression(self):
        left = self.binary()
        if self.eat("punct", "?"):
            a = self.expression()
            self.eat("punct", ":")
            b = self.expression()
            return ir.Combine(line=getattr(left, "line", 0), parts=(a, b))
        return left

    _BIN = {"+", "-", "*", "/", "%", "==", "===", "!=", "<", ">", "<=", ">=", "&&", "||", "<=>", "&", "|", "=>"}

    def binary(self):
        left = self.unary()
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.value in self._BIN:
                self.next()
                right = self.unary()
                left = ir.Combine(line=tok.line, parts=(left, right))
            elif tok.kind == "kw" and tok.value in ("and", "or"):
                self.next()
                right = self.unary()
                left = ir.Combine(line=tok.line, parts=(left, right))
            else:
                return left

    def unary(self):
        tok = self.peek()
        if tok.kind == "punct" and tok.value in ("!", "-", "*", "&"):
            self.next()
            return self.unary()
        if tok.kind == "kw" and tok.value == "not":
            self.next()
            return self.unary()
        return self.postfix(self.primary())

    def primary(self):
        tok = self.peek()
        if tok.kind == "str":
            self.next()
            return ir.Literal(line=tok.line, kind="str", value=tok.value)
        if tok.kind == "istr":
            self.next()
            parts = []
            for kind, payload in tok.value:
                if kind == "str":
                    if payload:
                        parts.append(ir.Literal(line=tok.line, kind="str", value=payload))
                else:
                    parts.append(parse_rb_expression(payload, tok.line))
            if len(parts) == 1 and isinstance(parts[0], ir.Literal):
                return parts[0]
            return ir.Combine(line=tok.line, parts=tuple(parts))
        if tok.kind == "sym":
            self.next()
            return ir.Literal(line=tok.line, kind="other", value=tok.value)
        if tok.kind == "num":
            self.next()
            return ir.Literal(line=tok.line, kind="num", value=tok.value)
        if tok.kind == "kw" and tok.value in ("true", "false", "nil", "self"):
            self.next()
            return ir.Literal(line=tok.line, kind="other")
        if tok.kind == "kw" and tok.value in ("lambda", "proc"):
            self.next()
            if self.at("punct", "{") or self.at("kw", "do"):
                return self.block_arg()
            return ir.Opaque(line=tok.line)
        if tok.kind == "punct" and tok.value == "->":
            self.next()
            params = []
            if self.eat("punct", "("):
                while not self.at("punct", ")") and not self.at("eof"):
                    p = self.next()
                    if p.kind == "name":
                        params.append(p.value)
                    self.eat("punct", ",")
                self.eat("punct", ")")
            block = self.block_arg()
            if isinstance(block, ir.FuncExpr):
                return ir.FuncExpr(line=tok.line, params=tuple(params) or block.params, body=block.body)
            return ir.Opaque(line=tok.line)
        if tok.kind == "punct" and tok.value == "(":
            self.next()
            expr = self.expression()
            self.eat("punct", ")")
            return expr
        if tok.kind == "punct" and tok.value == "[":
            self.next()
            items = []
            while not self.at("punct", "]") and not self.at("eof"):
                self.skip_newlines()
                if self.at("punct", "]"):
                    break
                items.append(self.expression())
                self.skip_newlines()
                if not self.eat("punct", ","):
                    break
            self.eat("punct", "]")
            return ir.Combine(line=tok.line, parts=tuple(items))
        if tok.kind == "punct" and tok.value == "{":
            # hash literal
            self.next()
            entries = []
            while not self.at("punct", "}") and not self.at("eof"):
                self.skip_newlines()
                if self.at("punct", "}"):
                    break
                key_tok = self.peek()
                key = None
                if key_tok.kind in ("sym", "str", "name", "const"):
                    self.next()
                    key = key_tok.value
                    if not (self.eat("punct", "=>") or self.eat("punct", ":")):
                        # not a key, re-parse as expression
                        entries.append((None, ir.NameRef(line=key_tok.line, name=key)))
                        self.eat("punct", ",")
                        continue
                    entries.append((key, self.expression()))
                else:
                    entries.append((None, self.expression()))
                self.skip_newlines()
                if not self.eat("punct", ","):
                    break
            self.eat("punct", "}")
            return ir.ObjectLit(line=tok.line, entries=tuple(entries))
        if tok.kind in ("name", "const"):
            return self.path_or_call()
        self.next()
        return ir.Opaque(line=tok.line)

    def path_or_call(self):
        tok = self.next()
        parts = [tok.value]
        line = tok.line
        while self.at("punct", "::"):
            self.next()
            nxt = self.next()
            parts.append(nxt.value)
        expr = ir.NameRef(line=line, name=parts[0]) if len(parts) == 1 else ir.PathRef(line=line, parts=tuple(parts))
        # parenless call: name/const path followed by an argument token
        # on the same line (strings, symbols, numbers, names)
        nxt = self.peek()
        if (
            nxt.kind in ("str", "istr", "sym", "num", "name", "const")
            and nxt.line == line
        ):
            args = [self.expression()]
            while self.eat("punct", ","):
                args.append(self.expression())
            call = ir.CallExpr(line=line, callee=expr, args=tuple(args))
            if self.at("punct", "{") and self._looks_like_block():
                call = ir.CallExpr(line=line, callee=expr, args=tuple(args) + (self.block_arg(),))
            elif self.at("kw", "do"):
                call = ir.CallExpr(line=line, callee=expr, args=tuple(args) + (self.block_arg(),))
            return call
        return expr

    def _looks_like_block(self):
        # '{ |' or '{' right after a call is a block, not a hash
        return self.peek(1).kind == "punct" and self.peek(1).value == "|"

    def block_arg(self):
        tok = self.peek()
        params = []
        if self.eat("kw", "do"):
            if self.eat("punct", "|"):
                while not self.at("punct", "|") and not self.at("eof"):
                    p = self.next()
                    if p.kind == "name":
                        params.append(p.value)
                    self.eat("punct", ",")
                self.eat("punct", "|")
            body = self.statements(until=("end",))
            self.eat("kw", "end")
            return ir.FuncExpr(line=tok.line, params=tuple(params), body=tuple(body))
        if self.eat("punct", "{"):
            if self.eat("punct", "|"):
                while not self.at("punct", "|") and not self.at("eof"):
                    p = self.next()
                    if p.kind == "name":
                        params.append(p.value)
                    self.eat("punct", ",")
                self.eat("punct", "|")
            body = []
            self.skip_newlines()
            while not self.at("punct", "}") and not self.at("eof"):
                body.extend(self.statement())
                self.skip_newlines()
            self.eat("punct", "}")
            return ir.FuncExpr(line=tok.line, params=tuple(params), body=tuple(body))
        return ir.Opaque(line=tok.line)

    def postfix(self, expr):
        while True:
            if self.at("punct", "."):
                self.next()
                attr_tok = self.next()
                attr = attr_tok.value
                if isinstance(expr, ir.NameRef):
                    expr = ir.PathRef(line=expr.line, parts=(expr.name, attr))
                elif isinstance(expr, ir.PathRef):
                    expr = ir.PathRef(line=expr.line, parts=expr.parts + (attr,))
                else:
                    expr = ir.AttrOf(line=attr_tok.line, base=expr, attr=attr)
                # method call with parens or trailing args/block
                if self.at("punct", "("):
                    args = self.call_args()
                    expr = self._with_block(ir.CallExpr(line=attr_tok.line, callee=expr, args=tuple(args)))
                elif self.peek().kind in ("str", "istr", "sym", "num", "name", "const") and self.peek().line == attr_tok.line:
                    args = [self.expression()]
                    while self.eat("punct", ","):
                        args.append(self.expression())
                    expr = self._with_block(ir.CallExpr(line=attr_tok.line, callee=expr, args=tuple(args)))
                elif self.at("punct", "{") and self._looks_like_block() or self.at("kw", "do"):
                    expr = ir.CallExpr(line=attr_tok.line, callee=expr, args=(self.block_arg(),))
            elif self.at("punct", "("):
                args = self.call_args()
                expr = self._with_block(ir.CallExpr(line=getattr(expr, "line", 0), callee=expr, args=tuple(args)))
            elif self.at("punct", "["):
                self.next()
                while not self.at("punct", "]") and not self.at("eof"):
                    self.expression()
                    if not self.eat("punct", ","):
                        break
                self.eat("punct", "]")
                expr = ir.AttrOf(line=getattr(expr, "line", 0), base=expr, attr="[]")
            else:
                return expr

    def _with_block(self, call):
        if self.at("kw", "do") or (self.at("punct", "{") and self._looks_like_block()):
            return ir.CallExpr(line=call.line, callee=call.callee, args=call.args + (self.block_arg(),))
        return call

    def call_args(self):
        self.next()  # (
        args = []
        while not self.at("punct", ")") and not self.at("eof"):
            self.skip_newlines()
            if self.at("punct", ")"):
                break
            args.append(self.expression())
            self.skip_newlines()
            if not self.eat("punct", ","):
                break
        self.eat("punct", ")")
        return args


def _implicit_return(body):
    """Ruby returns the last evaluated expression; surface that."""
    if body and isinstance(body[-1], ir.ExprStmt):
        last = body[-1]
        return body[:-1] + [ir.ReturnStmt(line=last.line, value=last.value)]
    return body


def _expr_to_target(expr):
    if isinstance(expr, ir.NameRef):
        return expr.name
    if isinstance(expr, ir.PathRef):
        return expr.dotted()
    if isinstance(expr, ir.AttrOf):
        return None
    return None


def parse_rb_expression(snippet: str, line: int):
    try:
        tokens = tokenize(snippet)
        return _Parser(tokens).expression()
    except RbParseError:
        return ir.Opaque(line=line)


def parse_rb(path: str, text: str) -> ir.Unit:
    try:
        tokens = tokenize(text)
        body = _Parser(tokens).parse_program()
    except (RbParseError, RecursionError) as exc:
        return ir.Unit(path=path, language="rb", parse_error=f"{path}: {exc}")
    return ir.Unit(path=path, language="rb", body=tuple(body))
