"""Static analysis of one package: usage, flows, hooks, exports.

Also home to combine_usage, the cross-package closure: a package's
combined API set is its own labeled calls plus everything its
dependency closure can reach, computed once per strongly connected
component, dependencies first.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from pkgvet.errors import MissingDepSummaryError, VersionOrderError
from pkgvet.model import SOURCE_EXTENSIONS, PackageCoordinate, PackageMetadata, SubjectLanguage
from pkgvet.registry.graph import DependencyGraph, condense, topo_order
from pkgvet.static import flows as flows_mod
from pkgvet.static.hooks import HookInfo, detect_install_hook, hook_info_from_dict
from pkgvet.static.labels import ApiLabelSet
from pkgvet.static.parse_js import parse_js
from pkgvet.static.parse_py import parse_py
from pkgvet.static.parse_rb import parse_rb
from pkgvet.static.usage import extract_api_usage
from pkgvet.versions import compare

STATIC_ANALYZER_VERSION = "1.0.0"

_UNIT_SIZE_CAP = 2 * 1024 * 1024
_UNIT_TIME_BUDGET = 10.0
_LONG_LINE = 5000

_PARSERS = {
    SubjectLanguage.PY: parse_py,
    SubjectLanguage.JS: parse_js,
    SubjectLanguage.RB: parse_rb,
}


@dataclass
class StaticReport:
    coordinate: str
    language: str
    unit_paths: tuple = ()
    parse_errors: tuple = ()
    usage: tuple = ()  # UsageRecord dicts
    direct_apis: tuple = ()  # sorted qualified names, high confidence
    categories: tuple = ()  # sorted category names for direct_apis
    flows: tuple = ()  # FlowFinding dicts
    flow_pairs: tuple = ()  # sorted (source category, sink category) pairs
    exports: dict = field(default_factory=dict)  # export name -> summary dict
    hook: dict = field(default_factory=dict)
    notes: tuple = ()

    def to_dict(self) -> dict:
        return {
            "coordinate": self.coordinate,
            "language": self.language,
            "unit_paths": list(self.unit_paths),
            "parse_errors": list(self.parse_errors),
            "usage": [dict(u) for u in self.usage],
            "direct_apis": list(self.direct_apis),
            "categories": list(self.categories),
            "flows": [dict(f) for f in self.flows],
            "flow_pairs": [list(p) for p in self.flow_pairs],
            "exports": {k: dict(v) for k, v in sorted(self.exports.items())},
            "hook": dict(self.hook),
            "notes": list(self.notes),
        }


def static_report_from_dict(doc: dict) -> StaticReport:
    return StaticReport(
        coordinate=doc["coordinate"],
        language=doc["language"],
        unit_paths=tuple(doc.get("unit_paths", ())),
        parse_errors=tuple(doc.get("parse_errors", ())),
        usage=tuple(doc.get("usage", ())),
        direct_apis=tuple(doc.get("direct_apis", ())),
        categories=tuple(doc.get("categories", ())),
        flows=tuple(doc.get("flows", ())),
        flow_pairs=tuple(tuple(p) for p in doc.get("flow_pairs", ())),
        exports=dict(doc.get("exports", {})),
        hook=dict(doc.get("hook", {})),
        notes=tuple(doc.get("notes", ())),
    )


def load_units(source_root, language: SubjectLanguage):
    """Parse every source file under the root. Parse failures and budget
    overruns become notes, never exceptions: one unreadable file must
    not hide the rest of the package."""
    root = Path(source_root)
    parser = _PARSERS[language]
    units = []
    notes = []
    if not root.is_dir():
        return units, ("source root missing",)
    exts = SOURCE_EXTENSIONS[language]
    for path in sorted(root.rglob("*")):
        if not path.is_file() or path.is_symlink() or path.suffix not in exts:
            continue
        rel = str(path.relative_to(root))
        try:
            raw = path.read_bytes()
        except OSError as exc:
            notes.append(f"{rel}: unreadable ({exc})")
            continue
        if len(raw) > _UNIT_SIZE_CAP:
            notes.append(f"{rel}: skipped, {len(raw)} bytes exceeds size cap; OBFUSCATION_SUSPECT")
            continue
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError:
            notes.append(f"{rel}: not valid utf-8, skipped")
            continue
        if any(len(line) > _LONG_LINE for line in text.splitlines()):
            notes.append(f"{rel}: very long lines; OBFUSCATION_SUSPECT")
        started = time.monotonic()
        unit = parser(rel, text)
        elapsed = time.monotonic() - started
        if elapsed > _UNIT_TIME_BUDGET:
            notes.append(f"{rel}: parse took {elapsed:.1f}s, over budget")
        units.append(unit)
    return units, tuple(notes)


def analyze_package(meta: PackageMetadata, labels: ApiLabelSet, dep_exports=None) -> StaticReport:
    """Static report for one package given its dependencies' export summaries.

    dep_exports maps a dependency's import name to {export: FuncSummary}.
    """
    language = meta.subject_language
    units, notes = load_units(meta.source_root, language)
    usage = []
    for unit in units:
        usage.extend(extract_api_usage(unit, labels))
    usage.sort(key=lambda r: (r.file, r.line, r.label.qualified_name))
    direct = sorted({r.label.qualified_name for r in usage if r.confidence == "high"})
    categories = sorted({r.label.category.value for r in usage if r.confidence == "high"})
    findings = flows_mod.analyze_flows(units, labels, dep_exports)
    exports = flows_mod.summarize_exports(units, labels, dep_exports)
    pairs = sorted({f.category_pair() for f in findings})
    hook = detect_install_hook(meta.source_root, meta.coordinate.registry)
    parse_errors = tuple(u.parse_error for u in units if u.parse_error)
    return StaticReport(
        coordinate=meta.coordinate.key(),
        language=language.value,
        unit_paths=tuple(u.path for u in units),
        parse_errors=parse_errors,
        usage=tuple(r.to_dict() for r in usage),
        direct_apis=tuple(direct),
        categories=tuple(categories),
        flows=tuple(f.to_dict() for f in findings),
        flow_pairs=tuple(pairs),
        exports={k: v.to_dict() for k, v in exports.items()},
        hook=hook.to_dict(),
        notes=notes + (tuple(f"parse error: {e}" for e in parse_errors)),
    )


def combine_usage(direct, edges) -> dict:
    """Fold dependency APIs upward: every key's combined set is its own
    APIs plus the union over its dependencies' combined sets. Exact on
    cycles: members of one strongly connected component share a set.

    direct: key -> iterable of API names. edges: key -> iterable of
    dependency keys. Every edge endpoint must have a direct entry.
    """
    direct = {k: frozenset(v) for k, v in direct.items()}
    norm_edges = {}
    for key in direct:
        targets = []
        for dep in edges.get(key, ()):
            if dep not in direct:
                raise MissingDepSummaryError(f"{key} depends on {dep}, which has no usage summary")
            targets.append(dep)
        norm_edges[key] = tuple(sorted(set(targets)))
    for key in edges:
        if key not in direct:
            raise MissingDepSummaryError(f"{key} has edges but no usage summary")
    shim = DependencyGraph(nodes={k: None for k in direct}, edges=norm_edges, warnings=())
    shim = replace(shim, sccs=condense(shim))
    member_scc = shim.scc_of()
    combined_by_scc = {}
    for scc in topo_order(shim):
        acc = frozenset()
        for member in scc:
            acc |= direct[member]
        dep_sccs = {member_scc[d] for m in scc for d in norm_edges[m] if member_scc[d] != scc}
        for dep_scc in dep_sccs:
            acc |= combined_by_scc[dep_scc]
        combined_by_scc[scc] = acc
    return {k: combined_by_scc[member_scc[k]] for k in direct}


def diff_api_categories(older: StaticReport, newer: StaticReport) -> dict:
    """What a release adds over a previous one, API- and category-wise."""
    old_coord = PackageCoordinate.parse(older.coordinate)
    new_coord = PackageCoordinate.parse(newer.coordinate)
    if (old_coord.registry, old_coord.name) != (new_coord.registry, new_coord.name):
        raise VersionOrderError(
            f"cannot diff different packages: {older.coordinate} vs {newer.coordinate}"
        )
    if compare(old_coord.version, new_coord.version) >= 0:
        raise VersionOrderError(
            f"diff base must be older: {old_coord.version} !< {new_coord.version}"
        )
    added_apis = sorted(set(newer.direct_apis) - set(older.direct_apis))
    added_categories = sorted(set(newer.categories) - set(older.categories))
    return {"added_apis": added_apis, "added_categories": added_categories}
