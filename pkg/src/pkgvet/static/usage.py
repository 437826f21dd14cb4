"""Find labeled API calls in parsed units.

Resolution walks every call expression, rewrites the callee through the
unit's import aliases, and tries match modes from most to least
precise: exact dotted path, bare global name, then instance method by
method name. Instance matches are high confidence only when the
receiver was assigned from a constructor-style call on the label's
class path; otherwise they are reported at low confidence so later
stages can weight them down instead of dropping them.
"""

from __future__ import annotations

from dataclasses import dataclass

from pkgvet.static import ir
from pkgvet.static.labels import ApiLabel, ApiLabelSet, MatchMode


@dataclass(frozen=True)
class UsageRecord:
    label: ApiLabel
    file: str
    line: int
    mode_used: str  # qualified | global | instance
    confidence: str  # high | low

    def to_dict(self) -> dict:
        return {
            "api": self.label.qualified_name,
            "category": self.label.category.value,
            "roles": sorted(r.value for r in self.label.roles),
            "file": self.file,
            "line": self.line,
            "mode": self.mode_used,
            "confidence": self.confidence,
        }


def build_alias_env(unit: ir.Unit) -> dict:
    """local name -> dotted remote path, from imports and straight renames."""
    env = {}
    for stmt in unit.body:
        if isinstance(stmt, ir.ImportStmt):
            for local, remote in stmt.bindings:
                env[local] = remote
        elif isinstance(stmt, ir.AssignStmt) and stmt.target and not stmt.aug:
            if isinstance(stmt.value, ir.NameRef) and stmt.value.name in env:
                env[stmt.target] = env[stmt.value.name]
            elif isinstance(stmt.value, ir.PathRef):
                head, *rest = stmt.value.parts
                base = env.get(head, head)
                env[stmt.target] = ".".join([base] + rest)
    return env


def resolve_path(parts, env) -> str:
    head = parts[0]
    base = env.get(head, head)
    return ".".join([base] + list(parts[1:]))


def build_instance_env(stmts, env, out=None) -> dict:
    """variable -> constructor path, for receiver-aware instance matching."""
    if out is None:
        out = {}
    for stmt in stmts:
        if isinstance(stmt, ir.AssignStmt) and stmt.target and isinstance(stmt.value, ir.CallExpr):
            callee = stmt.value.callee
            if isinstance(callee, ir.PathRef):
                out[stmt.target] = resolve_path(callee.parts, env)
            elif isinstance(callee, ir.NameRef):
                out[stmt.target] = env.get(callee.name, callee.name)
        if isinstance(stmt, ir.FuncDecl):
            build_instance_env(stmt.body, env, out)
    return out


def _receiver_matches(ctor_path: str, class_path: str) -> bool:
    # v = mod.Thing() matches class "mod.Thing" but also class "Thing":
    # labels often name the returned object, not the factory module
    return (
        ctor_path == class_path
        or ctor_path.startswith(class_path + ".")
        or ctor_path.endswith("." + class_path)
    )


def match_callee(callee, env, instances, labels: ApiLabelSet):
    """All label matches for one callee: (label, mode_used, confidence)."""
    matches = []
    if isinstance(callee, ir.NameRef):
        resolved = env.get(callee.name)
        if resolved:
            label = labels.by_qualified.get(resolved)
            if label and label.match_mode is MatchMode.QUALIFIED_STATIC:
                return [(label, "qualified", "high")]
        label = labels.by_global.get(callee.name)
        if label:
            return [(label, "global", "high")]
        return matches
    if isinstance(callee, ir.PathRef):
        resolved = resolve_path(callee.parts, env)
        label = labels.by_qualified.get(resolved)
        if label and label.match_mode is MatchMode.QUALIFIED_STATIC:
            return [(label, "qualified", "high")]
        method = callee.parts[-1]
        receiver = callee.parts[:-1]
        for label in labels.by_method.get(method, ()):
            conf = "low"
            if len(receiver) == 1 and receiver[0] in instances:
                if _receiver_matches(instances[receiver[0]], label.class_path()):
                    conf = "high"
                else:
                    continue
            matches.append((label, "instance", conf))
        return matches
    if isinstance(callee, ir.AttrOf):
        for label in labels.by_method.get(callee.attr, ()):
            matches.append((label, "instance", "low"))
    return matches


def extract_api_usage(unit: ir.Unit, labels: ApiLabelSet) -> list:
    env = build_alias_env(unit)
    instances = build_instance_env(unit.body, env)
    records = []
    for expr in ir.walk_expressions(unit.body):
        if isinstance(expr, ir.CallExpr):
            for label, mode, conf in match_callee(expr.callee, env, instances, labels):
                records.append(UsageRecord(label, unit.path, expr.line, mode, conf))
    return records
