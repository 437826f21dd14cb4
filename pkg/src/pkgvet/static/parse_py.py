"""Python frontend: stdlib ast lowered to the shared tree.

Control flow flattens into the surrounding statement list. A few
shapes get taint-relevant special treatment: `for x in e` and
`with e as x` become assignments, f-strings and binary operators
become Combine nodes, comprehensions surface their pieces.
"""

from __future__ import annotations

import ast

from pkgvet.static import ir


def parse_py(path: str, text: str) -> ir.Unit:
    try:
        module = ast.parse(text)
    except (SyntaxError, ValueError) as exc:
        return ir.Unit(path=path, language="py", parse_error=f"{path}: {exc}")
    dunder_all = _dunder_all(module)
    body = _stmts(module.body, top=True, dunder_all=dunder_all)
    return ir.Unit(path=path, language="py", body=tuple(body))


def _dunder_all(module):
    for node in module.body:
        if (
            isinstance(node, ast.Assign)
            and any(isinstance(t, ast.Name) and t.id == "__all__" for t in node.targets)
            and isinstance(node.value, (ast.List, ast.Tuple))
        ):
            return {
                e.value for e in node.value.elts if isinstance(e, ast.Constant) and isinstance(e.value, str)
            }
    return None


def _stmts(nodes, top=False, dunder_all=None, class_prefix=""):
    out = []
    for node in nodes:
        out.extend(_stmt(node, top=top, dunder_all=dunder_all, class_prefix=class_prefix))
    return out


def _exported(name, top, dunder_all):
    if not top:
        return False
    if dunder_all is not None:
        return name in dunder_all
    return not name.startswith("_")


def _stmt(node, top=False, dunder_all=None, class_prefix=""):
    line = getattr(node, "lineno", 0)
    if isinstance(node, (ast.Import, ast.ImportFrom)):
        return _import(node)
    if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
        name = class_prefix + node.name
        params = tuple(a.arg for a in node.args.args if a.arg not in ("self", "cls"))
        body = _stmts(node.body)
        return [
            ir.FuncDecl(
                line=line,
                name=name,
                params=params,
                body=tuple(body),
                exported=_exported(node.name, top, dunder_all),
            )
        ]
    if isinstance(node, ast.ClassDef):
        inner = _stmts(node.body, top=False, dunder_all=dunder_all, class_prefix=node.name + ".")
        # public methods of an exported class are reachable from outside
        if _exported(node.name, top, dunder_all):
            inner = [
                ir.FuncDecl(st.line, st.name, st.params, st.body, exported=True)
                if isinstance(st, ir.FuncDecl) and not st.name.split(".")[-1].startswith("_")
                else st
                for st in inner
            ]
        return inner
    if isinstance(node, ast.Assign):
        value = _expr(node.value)
        out = []
        for target in node.targets:
            out.append(ir.AssignStmt(line=line, target=_target(target), value=value))
        return out
    if isinstance(node, ast.AugAssign):
        return [ir.AssignStmt(line=line, target=_target(node.target), value=_expr(node.value), aug=True)]
    if isinstance(node, ast.AnnAssign):
        if node.value is None:
            return []
        return [ir.AssignStmt(line=line, target=_target(node.target), value=_expr(node.value))]
    if isinstance(node, ast.Return):
        return [ir.ReturnStmt(line=line, value=_expr(node.value) if node.value else None)]
    if isinstance(node, ast.Expr):
        return [ir.ExprStmt(line=line, value=_expr(node.value))]
    if isinstance(node, ast.If):
        return (
            [ir.ExprStmt(line=line, value=_expr(node.test))]
            + _stmts(node.body, top=top, dunder_all=dunder_all, class_prefix=class_prefix)
            + _stmts(node.orelse, top=top, dunder_all=dunder_all, class_prefix=class_prefix)
        )
    if isinstance(node, (ast.While,)):
        return [ir.ExprStmt(line=line, value=_expr(node.test))] + _stmts(node.body)
    if isinstance(node, (ast.For, ast.AsyncFor)):
        # iteration binds the loop variable to data derived from the iterable
        assign = ir.AssignStmt(line=line, target=_target(node.target), value=_expr(node.iter))
        return [assign] + _stmts(node.body) + _stmts(node.orelse)
    if isinstance(node, (ast.With, ast.AsyncWith)):
        out = []
        for item in node.items:
            value = _expr(item.context_expr)
            if item.optional_vars is not None:
                out.append(ir.AssignStmt(line=line, target=_target(item.optional_vars), value=value))
            else:
                out.append(ir.ExprStmt(line=line, value=value))
        return out + _stmts(node.body)
    if isinstance(node, ast.Try):
        out = _stmts(node.body)
        for handler in node.handlers:
            out.extend(_stmts(handler.body))
        return out + _stmts(node.orelse) + _stmts(node.finalbody)
    if isinstance(node, (ast.Raise, ast.Assert)):
        exprs = [e for e in (getattr(node, "exc", None), getattr(node, "test", None)) if e is not None]
        return [ir.ExprStmt(line=line, value=_expr(e)) for e in exprs]
    if isinstance(node, ast.Delete):
        return []
    if isinstance(node, (ast.Global, ast.Nonlocal, ast.Pass, ast.Break, ast.Continue)):
        return []
    return [ir.ExprStmt(line=line, value=ir.Opaque(line=line))]


def _import(node):
    line = node.lineno
    out = []
    if isinstance(node, ast.Import):
        for alias in node.names:
            local = alias.asname or alias.name.split(".")[0]
            remote = alias.name if alias.asname else alias.name.split(".")[0]
            out.append(ir.ImportStmt(line=line, module=alias.name, bindings=((local, remote),)))
    else:
        if node.module is None or node.level:
            # relative import: names bind within the package, not to a
            # labeled runtime module; keep the binding for dep matching
            module = node.module or ""
        else:
            module = node.module
        bindings = []
        for alias in node.names:
            if alias.name == "*":
                continue
            local = alias.asname or alias.name
            remote = f"{module}.{alias.name}" if module else alias.name
            bindings.append((local, remote))
        out.append(ir.ImportStmt(line=line, module=module, bindings=tuple(bindings)))
    return out


def _target(node):
    if isinstance(node, ast.Name):
        return node.id
    if isinstance(node, ast.Attribute):
        path = _path_of(node)
        return ".".join(path) if path else None
    if isinstance(node, (ast.Tuple, ast.List)) and node.elts:
        # first element keeps the taint; good enough for a, b = f()
        return _target(node.elts[0])
    if isinstance(node, ast.Subscript):
        return _target(node.value)
    if isinstance(node, ast.Starred):
        return _target(node.value)
    return None


def _path_of(node):
    parts = []
    while isinstance(node, ast.Attribute):
        parts.append(node.attr)
        node = node.value
    if isinstance(node, ast.Name):
        parts.append(node.id)
        return tuple(reversed(parts))
    return None


def _expr(node):
    line = getattr(node, "lineno", 0)
    if node is None:
        return ir.Literal(line=0, kind="other")
    if isinstance(node, ast.Constant):
        if isinstance(node.value, str):
            return ir.Literal(line=line, kind="str", value=node.value)
        if isinstance(node.value, (int, float)):
            return ir.Literal(line=line, kind="num", value=node.value)
        return ir.Literal(line=line, kind="other")
    if isinstance(node, ast.Name):
        return ir.NameRef(line=line, name=node.id)
    if isinstance(node, ast.Attribute):
        path = _path_of(node)
        if path:
            return ir.PathRef(line=line, parts=path)
        return ir.AttrOf(line=line, base=_expr(node.value), attr=node.attr)
    if isinstance(node, ast.Call):
        args = [_expr(a) for a in node.args] + [_expr(kw.value) for kw in node.keywords]
        return ir.CallExpr(line=line, callee=_expr(node.func), args=tuple(args))
    if isinstance(node, ast.Lambda):
        params = tuple(a.arg for a in node.args.args)
        body = (ir.ReturnStmt(line=line, value=_expr(node.body)),)
        return ir.FuncExpr(line=line, params=params, body=body)
    if isinstance(node, ast.JoinedStr):
        parts = []
        for value in node.values:
            if isinstance(value, ast.FormattedValue):
                parts.append(_expr(value.value))
            else:
                parts.append(_expr(value))
        return ir.Combine(line=line, parts=tuple(parts))
    if isinstance(node, ast.BinOp):
        return ir.Combine(line=line, parts=(_expr(node.left), _expr(node.right)))
    if isinstance(node, ast.BoolOp):
        return ir.Combine(line=line, parts=tuple(_expr(v) for v in node.values))
    if isinstance(node, ast.Compare):
        return ir.Combine(line=line, parts=(_expr(node.left),) + tuple(_expr(c) for c in node.comparators))
    if isinstance(node, ast.UnaryOp):
        return _expr(node.operand)
    if isinstance(node, (ast.Await, ast.Starred)):
        return _expr(node.value)
    if isinstance(node, ast.IfExp):
        return ir.Combine(line=line, parts=(_expr(node.body), _expr(node.orelse)))
    if isinstance(node, ast.Subscript):
        # indexing a tainted container keeps the taint
        return ir.AttrOf(line=line, base=_expr(node.value), attr="[]")
    if isinstance(node, (ast.Tuple, ast.List, ast.Set)):
        return ir.Combine(line=line, parts=tuple(_expr(e) for e in node.elts))
    if isinstance(node, ast.Dict):
        entries = []
        for k, v in zip(node.keys, node.values):
            key = k.value if isinstance(k, ast.Constant) and isinstance(k.value, str) else None
            entries.append((key, _expr(v)))
        return ir.ObjectLit(line=line, entries=tuple(entries))
    if isinstance(node, (ast.ListComp, ast.SetComp, ast.GeneratorExp)):
        parts = [_expr(node.elt)] + [_expr(g.iter) for g in node.generators]
        return ir.Combine(line=line, parts=tuple(parts))
    if isinstance(node, ast.DictComp):
        parts = [_expr(node.value)] + [_expr(g.iter) for g in node.generators]
        return ir.Combine(line=line, parts=tuple(parts))
    if isinstance(node, ast.NamedExpr):
        return _expr(node.value)
    return ir.Opaque(line=line)
