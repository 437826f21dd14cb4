"""JavaScript frontend: best-effort tokenizer and recursive descent.

Covers the subset that matters for call extraction and taint: CommonJS
require and ESM import bindings, function/arrow definitions, member
chains, calls, template literals, object/array literals, assignments
(including +=), returns, and module.exports shapes. Control flow
flattens. Anything else lowers to Opaque without failing the parse;
only unbalanced input yields a parse error.

The parser is hand-rolled because the analysis needs exactly this
subset and nothing here depends on full ECMAScript grammar fidelity;
unparsed constructs degrade to Opaque nodes, mirroring the pipeline's
best-effort stance elsewhere.
"""

from __future__ import annotations

import re

from pkgvet.static import ir

_KEYWORDS = {
    "const", "let", "var", "function", "return", "if", "else", "for", "while",
    "do", "try", "catch", "finally", "new", "class", "import", "from", "export",
    "default", "async", "await", "throw", "switch", "case", "break", "continue",
    "typeof", "delete", "in", "of", "instanceof", "void", "yield", "null",
    "true", "false", "undefined", "this", "extends", "as",
}

_PUNCT = [
    "=>", "===", "!==", "==", "!=", "<=", ">=", "&&", "||", "??", "...",
    "+=", "-=", "*=", "/=", "${", "?.", "++", "--",
    "{", "}", "(", ")", "[", "]", ";", ",", ".", ":", "?", "=", "+", "-",
    "*", "/", "%", "<", ">", "!", "&", "|", "^", "~",
]

# module ids that bind to a conventional name used in label paths
_MODULE_ALIASES = {"fs/promises": "fsPromises"}


class Token:
    __slots__ = ("kind", "value", "line")

    def __init__(self, kind, value, line):
        self.kind = kind  # name | kw | str | template | num | punct | eof
        self.value = value
        self.line = line

    def __repr__(self):
        return f"Token({self.kind},{self.value!r},{self.line})"


class JsParseError(Exception):
    pass


_NAME = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_NUM = re.compile(r"(0[xXbBoO][0-9a-fA-F]+|\d+(\.\d+)?([eE][+-]?\d+)?)")

# a '/' after one of these token kinds/values starts a regex literal
_REGEX_PRECEDERS = {"punct": None, "kw": None}


def tokenize(text: str):
    tokens = []
    i = 0
    line = 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j == -1 else j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j == -1:
                raise JsParseError(f"line {line}: unterminated block comment")
            line += text.count("\n", i, j)
            i = j + 2
            continue
        if ch in "'\"":
            j, value = _scan_string(text, i, ch, line)
            tokens.append(Token("str", value, line))
            i = j
            continue
        if ch == "`":
            start_line = line
            j, parts, line = _scan_template(text, i, line)
            tokens.append(Token("template", parts, start_line))
            i = j
            continue
        if ch == "/":
            prev = tokens[-1] if tokens else None
            is_regex = prev is None or prev.kind in ("punct", "kw") and prev.value not in (")", "]", "}")
            if prev is not None and prev.kind == "punct" and prev.value in (")", "]", "}"):
                is_regex = False
            if prev is not None and prev.kind in ("name", "num", "str", "template"):
                is_regex = False
            if is_regex:
                j = i + 1
                in_class = False
                while j < n:
                    c = text[j]
                    if c == "\\":
                        j += 2
                        continue
                    if c == "[":
                        in_class = True
                    elif c == "]":
                        in_class = False
                    elif c == "/" and not in_class:
                        break
                    elif c == "\n":
                        break
                    j += 1
                if j < n and text[j] == "/":
                    j += 1
                    while j < n and text[j].isalpha():
                        j += 1
                    tokens.append(Token("str", "<regex>", line))
                    i = j
                    continue
                # fall through: treat as division
        m = _NAME.match(text, i)
        if m:
            word = m.group(0)
            tokens.append(Token("kw" if word in _KEYWORDS else "name", word, line))
            i = m.end()
            continue
        m = _NUM.match(text, i)
        if m:
            tokens.append(Token("num", m.group(0), line))
            i = m.end()
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, line))
                i += len(p)
                break
        else:
            raise JsParseError(f"line {line}: unexpected character {ch!r}")
    tokens.append(Token("eof", "", line))
    return tokens


def _scan_string(text, i, quote, line):
    j = i + 1
    out = []
    while j < len(text):
        c = text[j]
        if c == "\\":
            out.append(text[j + 1 : j + 2])
            j += 2
            continue
        if c == quote:
            return j + 1, "".join(out)
        if c == "\n":
            break
        out.append(c)
        j += 1
    raise JsParseError(f"line {line}: unterminated string")


def _scan_template(text, i, line):
    """Returns (next index, parts, line). parts alternate between
    ("str", value) and ("expr", token list)."""
    j = i + 1
    parts = []
    buf = []
    while j < len(text):
        c = text[j]
        if c == "\\":
            buf.append(text[j + 1 : j + 2])
            j += 2
            continue
        if c == "\n":
            line += 1
            buf.append(c)
            j += 1
            continue
        if text.startswith("${", j):
            parts.append(("str", "".join(buf)))
            buf = []
            depth = 1
            k = j + 2
            start = k
            while k < len(text) and depth:
                if text[k] == "{":
                    depth += 1
                elif text[k] == "}":
                    depth -= 1
                elif text[k] == "\n":
                    line += 1
                k += 1
            parts.append(("expr", text[start : k - 1]))
            j = k
            continue
        if c == "`":
            parts.append(("str", "".join(buf)))
            return j + 1, parts, line
        buf.append(c)
        j += 1
    raise JsParseError(f"line {line}: unterminated template literal")


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

    def expect(self, kind, value=None):
        tok = self.next()
        if tok.kind != kind or (value is not None and tok.value != value):
            raise JsParseError(f"line {tok.line}: expected {value or kind}, got {tok.value!r}")
        return tok

    # --- statements ---

    def parse_program(self):
        body = []
        exports = []
        while not self.at("eof"):
            body.extend(self.statement(exports))
        return body, exports

    def statement(self, exports, top=True):
        tok = self.peek()
        if tok.kind == "punct" and tok.value == ";":
            self.next()
            return []
        if tok.kind == "punct" and tok.value == "{":
            return self.block(exports)
        if tok.kind == "kw":
            if tok.value in ("const", "let", "var"):
                return self.var_decl(exports)
            if tok.value == "function":
                return [self.function_decl(exports, exported=False)]
            if tok.value == "async" and self.peek(1).kind == "kw" and self.peek(1).value == "function":
                self.next()
                return [self.function_decl(exports, exported=False)]
            if tok.value == "return":
                self.next()
                if self.at("punct", ";") or self.at("punct", "}") or self.at("eof"):
                    self.eat("punct", ";")
                    return [ir.ReturnStmt(line=tok.line, value=None)]
                value = self.expression()
                self.eat("punct", ";")
                return [ir.ReturnStmt(line=tok.line, value=value)]
            if tok.value == "if":
                return self.if_stmt(exports)
            if tok.value in ("while", "switch"):
                self.next()
                self.expect("punct", "(")
                cond = self.expression()
                self.expect("punct", ")")
                body = self.block_or_stmt(exports)
                return [ir.ExprStmt(line=tok.line, value=cond)] + body
            if tok.value == "do":
                self.next()
                body = self.block_or_stmt(exports)
                if self.eat("kw", "while"):
                    self.expect("punct", "(")
                    cond = self.expression()
                    self.expect("punct", ")")
                    self.eat("punct", ";")
                    body.append(ir.ExprStmt(line=tok.line, value=cond))
                return body
            if tok.value == "for":
                return self.for_stmt(exports)
            if tok.value == "try":
                return self.try_stmt(exports)
            if tok.value == "throw":
                self.next()
                value = self.expression()
                self.eat("punct", ";")
                return [ir.ExprStmt(line=tok.line, value=value)]
            if tok.value == "import":
                return self.esm_import()
            if tok.value == "export":
                return self.esm_export(exports)
            if tok.value in ("break", "continue"):
                self.next()
                self.eat("name")
                self.eat("punct", ";")
                return []
            if tok.value == "class":
                return self.class_decl(exports)
            if tok.value in ("case", "default"):
                self.next()
                if tok.value == "case":
                    self.expression()
                self.expect("punct", ":")
                return []
        # expression / assignment statement
        return self.expr_statement()

    def block(self, exports):
        self.expect("punct", "{")
        body = []
        while not self.at("punct", "}") and not self.at("eof"):
            body.extend(self.statement(exports, top=False))
        self.expect("punct", "}")
        return body

    def block_or_stmt(self, exports):
        if self.at("punct", "{"):
            return self.block(exports)
        return self.statement(exports, top=False)

    def var_decl(self, exports):
        self.next()  # const/let/var
        out = []
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.value == "{":
                # destructuring from require(): const {a, b: c} = require('m')
                names = self.destructure_names()
                if self.eat("punct", "="):
                    value = self.expression()
                    module = _require_target(value)
                    if module:
                        bindings = tuple((local, f"{module}.{remote}") for local, remote in names)
                        out.append(ir.ImportStmt(line=tok.line, module=module, bindings=bindings))
                    else:
                        for local, _ in names:
                            out.append(
                                ir.AssignStmt(line=tok.line, target=local, value=value)
                            )
            elif tok.kind == "punct" and tok.value == "[":
                self.skip_balanced("[", "]")
                if self.eat("punct", "="):
                    value = self.expression()
                    out.append(ir.ExprStmt(line=tok.line, value=value))
            else:
                name = self.expect("name").value
                if self.eat("punct", "="):
                    value = self.expression()
                    module = _require_target(value)
                    if module:
                        out.append(
                            ir.ImportStmt(line=tok.line, module=module, bindings=((name, module),))
                        )
                    else:
                        out.append(ir.AssignStmt(line=tok.line, target=name, value=value))
                else:
                    out.append(ir.AssignStmt(line=tok.line, target=name, value=ir.Literal(line=tok.line, kind="other")))
            if not self.eat("punct", ","):
                break
        self.eat("punct", ";")
        return out

    def destructure_names(self):
        self.expect("punct", "{")
        names = []
        while not self.at("punct", "}") and not self.at("eof"):
            tok = self.next()
            if tok.kind in ("name", "str"):
                remote = tok.value
                local = remote
                if self.eat("punct", ":") or self.eat("kw", "as"):
                    inner = self.next()
                    local = inner.value if inner.kind == "name" else remote
                names.append((local, remote))
            self.eat("punct", ",")
        self.expect("punct", "}")
        return names

    def function_decl(self, exports, exported):
        tok = self.expect("kw", "function")
        name_tok = self.eat("name")
        name = name_tok.value if name_tok else "<anon>"
        params = self.param_list()
        body = self.block(exports)
        return ir.FuncDecl(line=tok.line, name=name, params=tuple(params), body=tuple(body), exported=exported)

    def class_decl(self, exports):
        tok = self.next()
        self.eat("name")
        if self.eat("kw", "extends"):
            self.postfix(self.primary(), allow_call=False)
        if self.at("punct", "{"):
            self.skip_balanced("{", "}")
        return [ir.ExprStmt(line=tok.line, value=ir.Opaque(line=tok.line))]

    def param_list(self):
        self.expect("punct", "(")
        params = []
        depth = 1
        while depth and not self.at("eof"):
            tok = self.next()
            if tok.kind == "punct" and tok.value == "(":
                depth += 1
            elif tok.kind == "punct" and tok.value == ")":
                depth -= 1
            elif tok.kind == "name" and depth == 1:
                params.append(tok.value)
        return params

    def if_stmt(self, exports):
        tok = self.next()
        self.expect("punct", "(")
        cond = self.expression()
        self.expect("punct", ")")
        body = self.block_or_stmt(exports)
        out = [ir.ExprStmt(line=tok.line, value=cond)] + body
        if self.eat("kw", "else"):
            out.extend(self.block_or_stmt(exports))
        return out

    def for_stmt(self, exports):
        tok = self.next()
        self.expect("punct", "(")
        head = []
        # for (const x of expr): bind x from expr
        if self.peek().kind == "kw" and self.peek().value in ("const", "let", "var"):
            self.next()
            if self.at("name"):
                var = self.next().value
                if self.eat("kw", "of") or self.eat("kw", "in"):
                    iterable = self.expression()
                    head.append(ir.AssignStmt(line=tok.line, target=var, value=iterable))
                elif self.eat("punct", "="):
                    head.append(ir.AssignStmt(line=tok.line, target=var, value=self.expression()))
            # drain the rest of the head
        depth = 1
        while depth and not self.at("eof"):
            t = self.next()
            if t.kind == "punct" and t.value == "(":
                depth += 1
            elif t.kind == "punct" and t.value == ")":
                depth -= 1
        body = self.block_or_stmt(exports)
        return head + body

    def try_stmt(self, exports):
        self.next()
        out = self.block(exports)
        if self.eat("kw", "catch"):
            if self.at("punct", "("):
                self.skip_balanced("(", ")")
            out.extend(self.block(exports))
        if self.eat("kw", "finally"):
            out.extend(self.block(exports))
        return out

    def esm_import(self):
        tok = self.next()
        bindings = []
        default_local = None
        if self.at("str"):
            module = _module_name(self.next().value)
            self.eat("punct", ";")
            return [ir.ImportStmt(line=tok.line, module=module, bindings=())]
        if self.at("name"):
            default_local = self.next().value
            self.eat("punct", ",")
        named = []
        if self.at("punct", "{"):
            named = self.destructure_names()
        if self.eat("punct", "*"):
            self.expect("kw", "as")
            default_local = default_local or self.expect("name").value
        self.expect("kw", "from")
        module = _module_name(self.expect("str").value)
        if default_local:
            bindings.append((default_local, module))
        for local, remote in named:
            bindings.append((local, f"{module}.{remote}"))
        self.eat("punct", ";")
        return [ir.ImportStmt(line=tok.line, module=module, bindings=tuple(bindings))]

    def esm_export(self, exports):
        tok = self.next()
        if self.eat("kw", "default"):
            if self.at("kw", "function") or (self.at("kw", "async") and self.peek(1).value == "function"):
                self.eat("kw", "async")
                fn = self.function_decl(exports, exported=True)
                exports.append(("default", fn.name, None))
                return [fn]
            value = self.expression()
            self.eat("punct", ";")
            if isinstance(value, ir.FuncExpr):
                exports.append(("default", None, value))
            elif isinstance(value, ir.NameRef):
                exports.append(("default", value.name, None))
            else:
                exports.append(("default", None, None))
            return [ir.AssignStmt(line=tok.line, target="module.exports", value=value)]
        if self.at("kw", "function") or (self.at("kw", "async") and self.peek(1).value == "function"):
            self.eat("kw", "async")
            fn = self.function_decl(exports, exported=True)
            exports.append((fn.name, fn.name, None))
            return [fn]
        if self.peek().kind == "kw" and self.peek().value in ("const", "let", "var"):
            stmts = self.var_decl(exports)
            for st in stmts:
                if isinstance(st, ir.AssignStmt) and st.target:
                    func = st.value if isinstance(st.value, ir.FuncExpr) else None
                    exports.append((st.target, st.target, func))
            return stmts
        if self.at("punct", "{"):
            for local, remote in self.destructure_names():
                exports.append((remote, local, None))
            self.eat("punct", ";")
            return []
        # export * from '...' and other shapes: ignore
        while not self.at("punct", ";") and not self.at("eof") and not self.at("punct", "}"):
            self.next()
        self.eat("punct", ";")
        return [ir.ExprStmt(line=tok.line, value=ir.Opaque(line=tok.line))]

    def expr_statement(self):
        tok = self.peek()
        expr = self.expression()
        # assignment statement shapes: path = value, path += value
        if self.at("punct", "=") or self.at("punct", "+="):
            aug = self.next().value == "+="
            value = self.expression()
            self.eat("punct", ";")
            target = _expr_to_target(expr)
            return [ir.AssignStmt(line=tok.line, target=target, value=value, aug=aug)]
        if self.peek().kind == "punct" and self.peek().value in ("-=", "*=", "/="):
            self.next()
            value = self.expression()
            self.eat("punct", ";")
            return [ir.AssignStmt(line=tok.line, target=_expr_to_target(expr), value=value, aug=True)]
        self.eat("punct", ";")
        return [ir.ExprStmt(line=tok.line, value=expr)]

    def skip_balanced(self, open_p, close_p):
        self.expect("punct", open_p)
        depth = 1
        while depth and not self.at("eof"):
            tok = self.next()
            if tok.kind == "punct" and tok.value == open_p:
                depth += 1
            elif tok.kind == "punct" and tok.value == close_p:
                depth -= 1

    # --- expressions (precedence collapsed: everything non-primary
    # becomes Combine, which is all the taint pass needs) ---

    def expression(self):
        left = self.ternary()
        return left

    def ternary(self):
        cond = self.binary()
        if self.eat("punct", "?"):
            a = self.ternary()
            self.expect("punct", ":")
            b = self.ternary()
            return ir.Combine(line=cond.line if hasattr(cond, "line") else 0, parts=(a, b))
        return cond

    _BIN_OPS = {"+", "-", "*", "/", "%", "==", "===", "!=", "!==", "<", ">", "<=", ">=", "&&", "||", "??", "&", "|", "^", "in", "instanceof"}

    def binary(self):
        left = self.unary()
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.value in self._BIN_OPS:
                self.next()
                right = self.unary()
                left = ir.Combine(line=tok.line, parts=(left, right))
            elif tok.kind == "kw" and tok.value in ("in", "instanceof"):
                self.next()
                right = self.unary()
                left = ir.Combine(line=tok.line, parts=(left, right))
            else:
                return left

    def unary(self):
        tok = self.peek()
        if tok.kind == "punct" and tok.value in ("!", "~", "-", "+", "++", "--", "..."):
            self.next()
            return self.unary()
        if tok.kind == "kw" and tok.value in ("typeof", "void", "delete", "await", "yield"):
            self.next()
            return self.unary()
        if tok.kind == "kw" and tok.value == "new":
            self.next()
            callee = self.postfix(self.primary(), allow_call=False)
            args = ()
            if self.at("punct", "("):
                args = tuple(self.call_args())
            return ir.CallExpr(line=tok.line, callee=callee, args=args)
        return self.postfix(self.primary())

    def primary(self):
        tok = self.peek()
        if tok.kind == "name":
            # arrow shorthand: name => body
            if self.peek(1).kind == "punct" and self.peek(1).value == "=>":
                self.next()
                self.next()
                return self.arrow_body(tok.line, [tok.value])
            self.next()
            return ir.NameRef(line=tok.line, name=tok.value)
        if tok.kind == "kw" and tok.value == "this":
            self.next()
            return ir.NameRef(line=tok.line, name="this")
        if tok.kind in ("str",):
            self.next()
            return ir.Literal(line=tok.line, kind="str", value=tok.value)
        if tok.kind == "num":
            self.next()
            return ir.Literal(line=tok.line, kind="num", value=tok.value)
        if tok.kind == "template":
            self.next()
            parts = []
            for kind, payload in tok.value:
                if kind == "str":
                    if payload:
                        parts.append(ir.Literal(line=tok.line, kind="str", value=payload))
                else:
                    parts.append(parse_js_expression(payload, tok.line))
            if len(parts) == 1 and isinstance(parts[0], ir.Literal):
                return parts[0]
            return ir.Combine(line=tok.line, parts=tuple(parts))
        if tok.kind == "kw" and tok.value in ("true", "false", "null", "undefined"):
            self.next()
            return ir.Literal(line=tok.line, kind="other")
        if tok.kind == "kw" and tok.value == "function":
            fn = self.function_decl([], exported=False)
            return ir.FuncExpr(line=fn.line, params=fn.params, body=fn.body, name=fn.name if fn.name != "<anon>" else None)
        if tok.kind == "kw" and tok.value == "async":
            self.next()
            return self.primary()
        if tok.kind == "kw" and tok.value == "class":
            self.class_decl([])
            return ir.Opaque(line=tok.line)
        if tok.kind == "punct" and tok.value == "(":
            # could be a parenthesized expression or an arrow parameter list
            save = self.pos
            try:
                params = self.try_arrow_params()
            except JsParseError:
                params = None
                self.pos = save
            if params is not None and self.at("punct", "=>"):
                self.next()
                return self.arrow_body(tok.line, params)
            self.pos = save
            self.expect("punct", "(")
            expr = self.expression()
            while self.eat("punct", ","):
                right = self.expression()
                expr = ir.Combine(line=tok.line, parts=(expr, right))
            self.expect("punct", ")")
            return expr
        if tok.kind == "punct" and tok.value == "{":
            return self.object_literal()
        if tok.kind == "punct" and tok.value == "[":
            self.next()
            items = []
            while not self.at("punct", "]") and not self.at("eof"):
                items.append(self.expression())
                if not self.eat("punct", ","):
                    break
            self.expect("punct", "]")
            return ir.Combine(line=tok.line, parts=tuple(items))
        self.next()
        return ir.Opaque(line=tok.line)

    def try_arrow_params(self):
        """Parse '(a, b)' as a parameter list; raise if shape is wrong."""
        self.expect("punct", "(")
        params = []
        if self.eat("punct", ")"):
            return params
        while True:
            if self.eat("punct", "..."):
                pass
            tok = self.next()
            if tok.kind != "name":
                raise JsParseError("not an arrow param list")
            name = tok.value
            if self.eat("punct", "="):
                self.expression()
            params.append(name)
            if self.eat("punct", ")"):
                return params
            if not self.eat("punct", ","):
                raise JsParseError("not an arrow param list")

    def arrow_body(self, line, params):
        if self.at("punct", "{"):
            body = self.block([])
            return ir.FuncExpr(line=line, params=tuple(params), body=tuple(body))
        value = self.expression()
        return ir.FuncExpr(line=line, params=tuple(params), body=(ir.ReturnStmt(line=line, value=value),))

    def object_literal(self):
        tok = self.expect("punct", "{")
        entries = []
        while not self.at("punct", "}") and not self.at("eof"):
            if self.eat("punct", "..."):
                entries.append((None, self.expression()))
            else:
                key_tok = self.next()
                key = key_tok.value if key_tok.kind in ("name", "str", "num", "kw") else None
                if self.at("punct", "("):
                    # shorthand method: name(params) {body}
                    params = self.param_list()
                    body = self.block([])
                    entries.append((key, ir.FuncExpr(line=key_tok.line, params=tuple(params), body=tuple(body), name=key)))
                elif self.eat("punct", ":"):
                    entries.append((key, self.expression()))
                else:
                    # shorthand {name}
                    entries.append((key, ir.NameRef(line=key_tok.line, name=key or "")))
            if not self.eat("punct", ","):
                break
        self.expect("punct", "}")
        return ir.ObjectLit(line=tok.line, entries=tuple(entries))

    def postfix(self, expr, allow_call=True):
        while True:
            if self.eat("punct", ".") or self.eat("punct", "?."):
                attr_tok = self.next()
                attr = attr_tok.value
                if isinstance(expr, ir.NameRef):
                    expr = ir.PathRef(line=expr.line, parts=(expr.name, attr))
                elif isinstance(expr, ir.PathRef):
                    expr = ir.PathRef(line=expr.line, parts=expr.parts + (attr,))
                else:
                    expr = ir.AttrOf(line=attr_tok.line, base=expr, attr=attr)
            elif self.at("punct", "[") and allow_call:
                self.next()
                index = self.expression() if not self.at("punct", "]") else ir.Opaque(line=self.peek().line)
                self.expect("punct", "]")
                expr = ir.AttrOf(line=getattr(expr, "line", 0), base=expr, attr="[]")
                _ = index
            elif self.at("punct", "(") and allow_call:
                args = self.call_args()
                expr = ir.CallExpr(line=getattr(expr, "line", self.peek().line), callee=expr, args=tuple(args))
            elif self.at("punct", "++") or self.at("punct", "--"):
                self.next()
            else:
                return expr

    def call_args(self):
        self.expect("punct", "(")
        args = []
        while not self.at("punct", ")") and not self.at("eof"):
            args.append(self.expression())
            if not self.eat("punct", ","):
                break
        self.expect("punct", ")")
        return args

    def expression_primary_path(self):
        if self.at("name"):
            return self.postfix(self.primary(), allow_call=False)
        return None


def _module_name(raw: str) -> str:
    name = raw
    if name.startswith("node:"):
        name = name[5:]
    return _MODULE_ALIASES.get(name, name)


def _require_target(expr) -> str | None:
    if (
        isinstance(expr, ir.CallExpr)
        and isinstance(expr.callee, ir.NameRef)
        and expr.callee.name == "require"
        and expr.args
        and isinstance(expr.args[0], ir.Literal)
        and expr.args[0].kind == "str"
    ):
        return _module_name(expr.args[0].value)
    return None


def _expr_to_target(expr) -> str | None:
    if isinstance(expr, ir.NameRef):
        return expr.name
    if isinstance(expr, ir.PathRef):
        return expr.dotted()
    if isinstance(expr, ir.AttrOf):
        base = _expr_to_target(expr.base)
        return f"{base}.{expr.attr}" if base else None
    return None


def parse_js_expression(snippet: str, line: int):
    """Parse one embedded template expression; Opaque on failure."""
    try:
        tokens = tokenize(snippet)
        return _Parser(tokens).expression()
    except JsParseError:
        return ir.Opaque(line=line)


def parse_js(path: str, text: str) -> ir.Unit:
    try:
        tokens = tokenize(text)
        parser = _Parser(tokens)
        body, export_pairs = parser.parse_program()
    except (JsParseError, RecursionError) as exc:
        return ir.Unit(path=path, language="js", parse_error=f"{path}: {exc}")
    extra = _collect_cjs_exports(body) + export_pairs
    return ir.Unit(path=path, language="js", body=tuple(body), extra_exports=tuple(extra))


def _collect_cjs_exports(body):
    """module.exports = {...} / module.exports.x = / exports.x = shapes.

    Returns (export name, local name or None, inline FuncExpr or None)
    triples; the analyzer maps them onto declared functions.
    """
    out = []

    def record(name, value):
        if isinstance(value, ir.FuncExpr):
            out.append((name, None, value))
        elif isinstance(value, ir.NameRef):
            out.append((name, value.name, None))
        else:
            out.append((name, None, None))

    for stmt in body:
        if not isinstance(stmt, ir.AssignStmt) or not stmt.target:
            continue
        target = stmt.target
        if target in ("module.exports", "exports"):
            value = stmt.value
            if isinstance(value, ir.ObjectLit):
                for key, entry in value.entries:
                    if key is not None:
                        record(key, entry)
            else:
                record("default", value)
        elif target.startswith("module.exports."):
            record(target.split(".", 2)[2], stmt.value)
        elif target.startswith("exports."):
            record(target.split(".", 1)[1], stmt.value)
    return out
