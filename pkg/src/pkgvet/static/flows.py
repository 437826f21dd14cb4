"""Taint tracking over the flattened IR, with cross-package summaries.

The engine abstract-interprets each unit: labeled source calls mint
taint tags, assignments and call results carry them, labeled sink
calls with tainted arguments produce flow findings. Functions are not
inlined; each gets a summary (sources it returns, parameters that
reach its return, parameters that reach sinks, parameters it invokes
as callbacks with tainted data) and call sites apply the summary.
Published exports of a dependency are the same summaries serialized,
so analyzing a consumer against dependency summaries and analyzing the
merged source produce the same flow signatures.

Control flow was flattened upstream, so assignments accumulate taint
(weak updates): a later clean assignment cannot prove the branch that
tainted the variable never ran.

Only high-confidence API matches participate here; method-name-only
guesses stay in the usage report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from pkgvet.static import ir
from pkgvet.static.labels import ApiLabelSet, Role
from pkgvet.static.usage import build_alias_env, build_instance_env, match_callee, resolve_path

_MAX_HOPS = 12
_MAX_SUMMARY_ROUNDS = 6


@dataclass(frozen=True)
class TaintTag:
    kind: str  # source | param
    qname: str = ""
    category: str = ""
    file: str = ""
    line: int = 0
    index: int = -1
    hops: tuple = ()

    def with_hop(self, file: str, line: int, note: str) -> "TaintTag":
        if len(self.hops) >= _MAX_HOPS:
            return self
        return TaintTag(
            kind=self.kind, qname=self.qname, category=self.category,
            file=self.file, line=self.line, index=self.index,
            hops=self.hops + ((file, line, note),),
        )


def _source_tag(qname: str, category: str, file: str, line: int, note: str = "") -> TaintTag:
    return TaintTag(
        kind="source", qname=qname, category=category, file=file, line=line,
        hops=((file, line, note or f"source {qname}"),),
    )


@dataclass(frozen=True)
class FlowFinding:
    source_api: str
    source_category: str
    source_file: str
    source_line: int
    sink_api: str
    sink_category: str
    sink_file: str
    sink_line: int
    path: tuple  # ((file, line, note), ...) first hop is the source, last the sink

    def signature(self) -> tuple:
        return (self.source_api, self.sink_api, (self.source_category, self.sink_category))

    def category_pair(self) -> tuple:
        return (self.source_category, self.sink_category)

    def to_dict(self) -> dict:
        return {
            "source": {
                "api": self.source_api, "category": self.source_category,
                "file": self.source_file, "line": self.source_line,
            },
            "sink": {
                "api": self.sink_api, "category": self.sink_category,
                "file": self.sink_file, "line": self.sink_line,
            },
            "path": [{"file": f, "line": ln, "note": note} for f, ln, note in self.path],
        }


def flow_finding_from_dict(doc: dict) -> FlowFinding:
    return FlowFinding(
        source_api=doc["source"]["api"], source_category=doc["source"]["category"],
        source_file=doc["source"]["file"], source_line=doc["source"]["line"],
        sink_api=doc["sink"]["api"], sink_category=doc["sink"]["category"],
        sink_file=doc["sink"]["file"], sink_line=doc["sink"]["line"],
        path=tuple((h["file"], h["line"], h["note"]) for h in doc["path"]),
    )


@dataclass
class FuncSummary:
    returns_sources: tuple = ()  # ((qname, category), ...)
    return_derives_params: tuple = ()  # (index, ...)
    param_sinks: dict = field(default_factory=dict)  # index -> ((qname, category), ...)
    callback_param_sources: dict = field(default_factory=dict)  # index -> ((qname, category), ...)

    def key(self) -> tuple:
        return (
            self.returns_sources, self.return_derives_params,
            tuple(sorted((k, v) for k, v in self.param_sinks.items())),
            tuple(sorted((k, v) for k, v in self.callback_param_sources.items())),
        )

    def roles(self) -> list:
        roles = []
        if self.returns_sources or self.callback_param_sources:
            roles.append("INDIRECT_SOURCE")
        if self.param_sinks:
            roles.append("INDIRECT_SINK")
        if self.return_derives_params:
            roles.append("PROPAGATOR")
        return roles

    def argument_positions(self) -> list:
        return sorted(self.param_sinks)

    def to_dict(self) -> dict:
        return {
            "roles": self.roles(),
            "returns_sources": [list(p) for p in self.returns_sources],
            "return_derives_params": list(self.return_derives_params),
            "param_sinks": {str(k): [list(p) for p in v] for k, v in sorted(self.param_sinks.items())},
            "callback_param_sources": {str(k): [list(p) for p in v] for k, v in sorted(self.callback_param_sources.items())},
            "argument_positions": self.argument_positions(),
        }


def func_summary_from_dict(doc: dict) -> FuncSummary:
    return FuncSummary(
        returns_sources=tuple(tuple(p) for p in doc.get("returns_sources", ())),
        return_derives_params=tuple(doc.get("return_derives_params", ())),
        param_sinks={int(k): tuple(tuple(p) for p in v) for k, v in doc.get("param_sinks", {}).items()},
        callback_param_sources={int(k): tuple(tuple(p) for p in v) for k, v in doc.get("callback_param_sources", {}).items()},
    )


class _Collector:
    """Per-function accumulation while its body executes abstractly."""

    def __init__(self, param_index):
        self.param_index = param_index  # name -> position
        self.returns_sources = set()
        self.return_derives_params = set()
        self.param_sinks = {}
        self.callback_param_sources = {}

    def add_return(self, taint):
        for tag in taint:
            if tag.kind == "source":
                self.returns_sources.add((tag.qname, tag.category))
            else:
                self.return_derives_params.add(tag.index)

    def add_param_sink(self, index, pairs):
        self.param_sinks.setdefault(index, set()).update(pairs)

    def add_callback_source(self, index, pairs):
        self.callback_param_sources.setdefault(index, set()).update(pairs)

    def build(self) -> FuncSummary:
        return FuncSummary(
            returns_sources=tuple(sorted(self.returns_sources)),
            return_derives_params=tuple(sorted(self.return_derives_params)),
            param_sinks={k: tuple(sorted(v)) for k, v in sorted(self.param_sinks.items())},
            callback_param_sources={k: tuple(sorted(v)) for k, v in sorted(self.callback_param_sources.items())},
        )


class _UnitCtx:
    __slots__ = ("path", "aliases", "instances")

    def __init__(self, unit):
        self.path = unit.path
        self.aliases = build_alias_env(unit)
        self.instances = build_instance_env(unit.body, self.aliases)


class _Engine:
    def __init__(self, units, labels: ApiLabelSet, dep_exports=None):
        self.labels = labels
        self.dep_exports = dep_exports or {}
        self.units = [u for u in units if u.parse_error is None]
        self.ctxs = {id(u): _UnitCtx(u) for u in self.units}
        self.functions = {}  # name -> (params, body, ctx)
        self.summaries = {}  # name -> FuncSummary
        self.findings = []
        self._seen = set()
        for unit in self.units:
            self._collect_functions(unit.body, self.ctxs[id(unit)])

    def _collect_functions(self, stmts, ctx):
        for stmt in stmts:
            if isinstance(stmt, ir.FuncDecl):
                self.functions[stmt.name] = (stmt.params, stmt.body, ctx)
                self._collect_functions(stmt.body, ctx)
            elif isinstance(stmt, ir.AssignStmt) and stmt.target and isinstance(stmt.value, ir.FuncExpr):
                self.functions[stmt.target] = (stmt.value.params, stmt.value.body, ctx)
                self._collect_functions(stmt.value.body, ctx)

    # --- top level passes ---

    def compute_summaries(self):
        for _ in range(_MAX_SUMMARY_ROUNDS):
            changed = False
            for name, (params, body, ctx) in sorted(self.functions.items()):
                summary = self._summarize(params, body, ctx, record=False)
                if name not in self.summaries or self.summaries[name].key() != summary.key():
                    self.summaries[name] = summary
                    changed = True
            if not changed:
                break

    def record_findings(self):
        for name, (params, body, ctx) in sorted(self.functions.items()):
            self._summarize(params, body, ctx, record=True)
        for unit in self.units:
            ctx = self.ctxs[id(unit)]
            top = [s for s in unit.body if not isinstance(s, ir.FuncDecl)]
            self._exec_block(top, {}, ctx, record=True, collector=None)

    def summarize_funcexpr(self, func: ir.FuncExpr, ctx) -> FuncSummary:
        return self._summarize(func.params, func.body, ctx, record=False)

    # --- function body interpretation ---

    def _summarize(self, params, body, ctx, record) -> FuncSummary:
        env = {}
        param_index = {}
        for i, p in enumerate(params):
            env[p] = frozenset({TaintTag(kind="param", index=i)})
            param_index[p] = i
        collector = _Collector(param_index)
        top = [s for s in body if not isinstance(s, ir.FuncDecl)]
        self._exec_block(top, env, ctx, record, collector)
        return collector.build()

    def _exec_block(self, stmts, env, ctx, record, collector):
        for stmt in stmts:
            if isinstance(stmt, ir.AssignStmt):
                taint = self._eval(stmt.value, env, ctx, record, collector)
                if stmt.target:
                    env[stmt.target] = env.get(stmt.target, frozenset()) | taint
            elif isinstance(stmt, ir.ExprStmt):
                self._eval(stmt.value, env, ctx, record, collector)
            elif isinstance(stmt, ir.ReturnStmt):
                if stmt.value is not None:
                    taint = self._eval(stmt.value, env, ctx, record, collector)
                    if collector is not None:
                        collector.add_return(taint)
            elif isinstance(stmt, ir.FuncDecl):
                continue
            elif isinstance(stmt, ir.ImportStmt):
                continue

    def _eval(self, expr, env, ctx, record, collector):
        empty = frozenset()
        if isinstance(expr, ir.Literal) or isinstance(expr, ir.Opaque):
            return empty
        if isinstance(expr, ir.NameRef):
            return env.get(expr.name, empty)
        if isinstance(expr, ir.PathRef):
            return env.get(expr.dotted(), empty) | env.get(expr.parts[0], empty)
        if isinstance(expr, ir.AttrOf):
            return self._eval(expr.base, env, ctx, record, collector)
        if isinstance(expr, ir.Combine):
            out = empty
            for part in expr.parts:
                out |= self._eval(part, env, ctx, record, collector)
            return out
        if isinstance(expr, ir.ObjectLit):
            out = empty
            for _, value in expr.entries:
                out |= self._eval(value, env, ctx, record, collector)
            return out
        if isinstance(expr, ir.FuncExpr):
            return empty
        if isinstance(expr, ir.CallExpr):
            return self._eval_call(expr, env, ctx, record, collector)
        return empty

    # --- call handling ---

    def _eval_call(self, call, env, ctx, record, collector):
        empty = frozenset()
        arg_taints = []
        for arg in call.args:
            if isinstance(arg, ir.FuncExpr):
                arg_taints.append(empty)  # body runs below, once seeds are known
            else:
                arg_taints.append(self._eval(arg, env, ctx, record, collector))

        callee = call.callee
        receiver_taint = empty
        if isinstance(callee, ir.PathRef):
            head = callee.parts[0]
            receiver_taint = env.get(head, empty)
            if len(callee.parts) > 2:
                receiver_taint |= env.get(".".join(callee.parts[:-1]), empty)
        elif isinstance(callee, ir.AttrOf):
            receiver_taint = self._eval(callee.base, env, ctx, record, collector)

        result = empty
        callback_seeds = empty
        handled = False

        matches = [m for m in match_callee(callee, ctx.aliases, ctx.instances, self.labels) if m[2] == "high"]
        for label, _, _ in matches:
            handled = True
            if Role.SINK in label.roles:
                for taint in arg_taints:
                    self._sink_hit(taint, label.qualified_name, label.category.value, ctx.path, call.line, record, collector)
                if receiver_taint and not any(arg_taints):
                    # data already inside the receiver, e.g. a tainted stream
                    self._sink_hit(receiver_taint, label.qualified_name, label.category.value, ctx.path, call.line, record, collector)
            if Role.SOURCE in label.roles:
                tag = _source_tag(label.qualified_name, label.category.value, ctx.path, call.line)
                result |= {tag}
                callback_seeds |= {tag}

        if not handled:
            target = self._call_target(callee, env, ctx)
            if target is not None:
                kind, name, summary = target
                handled = True
                note = f"via {name}"
                for i, pairs in summary.param_sinks.items():
                    if i < len(arg_taints):
                        for qname, category in pairs:
                            self._sink_hit(
                                arg_taints[i], qname, category, ctx.path, call.line,
                                record, collector, hop_note=note,
                            )
                for qname, category in summary.returns_sources:
                    result |= {_source_tag(qname, category, ctx.path, call.line, note=f"{note}: source {qname}")}
                for i in summary.return_derives_params:
                    if i < len(arg_taints):
                        result |= {t.with_hop(ctx.path, call.line, note) for t in arg_taints[i]}
                for i, pairs in summary.callback_param_sources.items():
                    if i < len(call.args) and isinstance(call.args[i], ir.FuncExpr):
                        for qname, category in pairs:
                            callback_seeds |= {_source_tag(qname, category, ctx.path, call.line, note=f"{note}: source {qname}")}
            elif collector is not None and isinstance(callee, ir.NameRef) and callee.name in collector.param_index:
                # the function's own parameter is being invoked
                idx = collector.param_index[callee.name]
                pairs = set()
                for taint in arg_taints:
                    for tag in taint:
                        if tag.kind == "source":
                            pairs.add((tag.qname, tag.category))
                if pairs:
                    collector.add_callback_source(idx, pairs)
                handled = True

        if receiver_taint:
            result |= receiver_taint
            callback_seeds |= receiver_taint

        if not handled and not receiver_taint:
            for taint in arg_taints:
                result |= taint

        for arg in call.args:
            if isinstance(arg, ir.FuncExpr):
                self._exec_closure(arg, callback_seeds, env, ctx, record, collector)

        return result

    def _call_target(self, callee, env, ctx):
        """Resolve a callee to a summarized function: local or dependency export."""
        if isinstance(callee, ir.NameRef):
            if callee.name in self.summaries:
                return ("local", callee.name, self.summaries[callee.name])
            resolved = ctx.aliases.get(callee.name, callee.name)
        elif isinstance(callee, ir.PathRef):
            dotted = callee.dotted()
            if dotted in self.summaries:
                return ("local", dotted, self.summaries[dotted])
            resolved = resolve_path(callee.parts, ctx.aliases)
            if resolved in self.summaries:
                return ("local", resolved, self.summaries[resolved])
        else:
            return None
        for module, exports in self.dep_exports.items():
            if resolved == module and "default" in exports:
                return ("dep", module, exports["default"])
            if resolved.startswith(module + "."):
                tail = resolved[len(module) + 1 :]
                if tail in exports:
                    return ("dep", f"{module}.{tail}", exports[tail])
            if resolved in exports:
                return ("dep", f"{module}:{resolved}", exports[resolved])
        return None

    def _exec_closure(self, func, seeds, env, ctx, record, collector):
        saved = {}
        for p in func.params:
            saved[p] = env.get(p)
            env[p] = frozenset(seeds)
        top = [s for s in func.body if not isinstance(s, ir.FuncDecl)]
        self._exec_block(top, env, ctx, record, collector)
        for p, old in saved.items():
            if old is None:
                env.pop(p, None)
            else:
                env[p] = old

    def _sink_hit(self, taint, sink_api, sink_category, file, line, record, collector, hop_note=""):
        for tag in taint:
            if tag.kind == "param":
                if collector is not None:
                    collector.add_param_sink(tag.index, {(sink_api, sink_category)})
                continue
            if not record:
                continue
            key = (tag.qname, tag.file, tag.line, sink_api, file, line, tag.category, sink_category)
            if key in self._seen:
                continue
            self._seen.add(key)
            hops = tag.hops
            if hop_note:
                hops = hops + ((file, line, hop_note),) if len(hops) < _MAX_HOPS else hops
            self.findings.append(FlowFinding(
                source_api=tag.qname, source_category=tag.category,
                source_file=tag.file, source_line=tag.line,
                sink_api=sink_api, sink_category=sink_category,
                sink_file=file, sink_line=line,
                path=hops + ((file, line, f"sink {sink_api}"),),
            ))


def analyze_flows(units, labels: ApiLabelSet, dep_exports=None) -> list:
    """Complete source-to-sink findings across the given units."""
    engine = _Engine(units, labels, dep_exports)
    engine.compute_summaries()
    engine.record_findings()
    return sorted(engine.findings, key=lambda f: (f.sink_file, f.sink_line, f.source_api, f.sink_api))


def summarize_exports(units, labels: ApiLabelSet, dep_exports=None) -> dict:
    """Taint summaries for everything the package exposes to importers.

    Keys are what a consumer writes after the module prefix ("post" for
    a JS named export, "default" for the module binding itself, a
    dotted constant path for Ruby). Values serialize with to_dict for
    publication alongside the package report.
    """
    engine = _Engine(units, labels, dep_exports)
    engine.compute_summaries()
    exports = {}
    for unit in units:
        if unit.parse_error is not None:
            continue
        ctx = engine.ctxs[id(unit)]
        for stmt in unit.body:
            if isinstance(stmt, ir.FuncDecl) and stmt.exported:
                summary = engine.summaries.get(stmt.name)
                if summary is not None:
                    exports[stmt.name] = summary
        for name, local, inline in unit.extra_exports:
            if inline is not None:
                exports[name] = engine.summarize_funcexpr(inline, ctx)
            elif local is not None and local in engine.summaries:
                exports[name] = engine.summaries[local]
    return {k: v for k, v in sorted(exports.items())}
