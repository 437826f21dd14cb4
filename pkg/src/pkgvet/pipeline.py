"""End-to-end orchestration: ingest, analyze, evaluate, rank.

Stage outputs are cached by content (coordinate, analyzer family,
analyzer version, config digest) with per-family invocation counters,
so a run over an unchanged corpus does no analysis work at all. Rule
evaluation happens after analysis from cached reports every time;
editing rules or exclusions re-ranks without re-analyzing.
"""

from __future__ import annotations

import functools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from pkgvet.cache import CacheKey, ReportCache, canonical_digest
from pkgvet.dynamic.classify import (
    DYNAMIC_ANALYZER_VERSION,
    DynamicFindings,
    Policies,
    attribute_findings,
    classify_trace,
    dynamic_findings_from_dict,
)
from pkgvet.dynamic.trace import parse_trace
from pkgvet.errors import PkgvetError, TraceMalformedError, VersionOrderError
from pkgvet.metadata.analyzer import (
    METADATA_ANALYZER_VERSION,
    MetadataConfig,
    analyze_metadata,
)
from pkgvet.model import Registry, canonical_name, format_timestamp
from pkgvet.registry.clients import FixtureClient, MalwareRecord
from pkgvet.registry.graph import amplified_downloads, build_graph, topo_order
from pkgvet.rules.engine import ExclusionLog, RuleSet, TriageEngine
from pkgvet.static.analyzer import (
    STATIC_ANALYZER_VERSION,
    analyze_package,
    diff_api_categories,
    static_report_from_dict,
)
from pkgvet.static.flows import func_summary_from_dict
from pkgvet.static.labels import load_api_labels, load_default_labels
from pkgvet.versions import compare


@dataclass
class PipelineResult:
    metas: dict = field(default_factory=dict)  # key -> PackageMetadata
    graph: object = None
    counters: dict = field(default_factory=lambda: {"metadata": 0, "static": 0, "dynamic": 0})
    metadata_reports: dict = field(default_factory=dict)  # key -> findings dict
    static_reports: dict = field(default_factory=dict)
    dynamic_reports: dict = field(default_factory=dict)  # pre-attribution findings
    attributed: dict = field(default_factory=dict)  # key -> tuple of attribution records
    contexts: dict = field(default_factory=dict)
    engine: TriageEngine = None
    errors: list = field(default_factory=list)  # (coordinate, stage, message)


def _meta_config_digest(config: MetadataConfig, popular_by_reg, indexes, malware) -> str:
    return canonical_digest({
        "config": config.to_config_doc(),
        "popular": {
            reg.value: [[p.name, p.downloads, sorted(p.authors)] for p in rows]
            for reg, rows in sorted(popular_by_reg.items(), key=lambda kv: kv[0].value)
        },
        "indexes": {
            reg.value: {name: sorted(authors) for name, authors in index.items()}
            for reg, index in sorted(indexes.items(), key=lambda kv: kv[0].value)
        },
        "malware": sorted(m.coordinate.key() for m in malware),
    })


def _static_config_digest(labels_by_lang) -> str:
    doc = {
        lang.value: [
            lbl.to_dict()
            for lbl in sorted(label_set.labels, key=lambda l: (l.qualified_name, l.match_mode.value))
        ]
        for lang, label_set in sorted(labels_by_lang.items(), key=lambda kv: kv[0].value)
    }
    return canonical_digest({"labels": doc, "unit_size_cap": 2 * 1024 * 1024, "unit_time_budget": 10})


def _import_names(meta) -> list:
    """Names under which dependent code imports this package."""
    name = meta.coordinate.name
    out = [name]
    if meta.coordinate.registry is Registry.PYPI:
        underscored = name.replace("-", "_")
        if underscored != name:
            out.append(underscored)
    return out


def _name_indexes(metas, popular_by_reg) -> dict:
    """Per registry: canonical name -> author set, for masking checks."""
    indexes = {reg: {} for reg in Registry}
    for meta in metas:
        reg = meta.coordinate.registry
        entry = indexes[reg].setdefault(canonical_name(reg, meta.coordinate.name), set())
        entry.update(meta.authors)
    for reg, rows in popular_by_reg.items():
        for p in rows:
            indexes[reg].setdefault(p.name, set()).update(p.authors)
    return indexes


def run_pipeline(
    corpus_root,
    cache_root=None,
    jobs=1,
    meta_config=None,
    labels_path=None,
    rules_path=None,
    exclusions_path=None,
    policies=None,
    workspace=None,
    analyzers=("metadata", "static", "dynamic"),
) -> PipelineResult:
    result = PipelineResult()
    client = FixtureClient(corpus_root)
    cache = ReportCache(cache_root)
    meta_config = meta_config or MetadataConfig()
    policies = policies or Policies()
    labels = load_api_labels(labels_path) if labels_path else load_default_labels()
    ruleset = RuleSet.load(rules_path)
    exclusions = ExclusionLog(exclusions_path)

    # --- ingest ---
    for coord in client.list_coordinates():
        try:
            meta = client.fetch_metadata(coord)
            result.metas[meta.coordinate.key()] = meta
        except PkgvetError as exc:
            result.errors.append((coord.key(), "ingest", str(exc)))
    metas = sorted(result.metas.values(), key=lambda m: m.coordinate.key())
    result.graph = build_graph(metas)
    amplified = amplified_downloads(result.graph)

    popular_by_reg = {reg: client.fetch_popular(reg) for reg in Registry}
    indexes = _name_indexes(metas, popular_by_reg)
    malware = client.load_known_malware()
    verdicts = _load_verdicts(workspace)
    malware = malware + _confirmed_overlay(verdicts, result.metas, malware)
    meta_digest = _meta_config_digest(meta_config, popular_by_reg, indexes, malware)
    static_digest = _static_config_digest(labels)
    dynamic_digest = canonical_digest(policies.config_doc())

    # --- metadata stage ---
    run_meta_stage = "metadata" in analyzers

    def run_metadata(meta):
        key = CacheKey(meta.coordinate.key(), "metadata", METADATA_ANALYZER_VERSION, meta_digest)
        cached = cache.get(key)
        if cached is not None:
            return meta.coordinate.key(), cached, False
        findings = analyze_metadata(
            meta,
            popular_by_reg[meta.coordinate.registry],
            indexes,
            malware,
            meta_config,
        )
        doc = findings.to_dict()
        cache.put(key, doc)
        return meta.coordinate.key(), doc, True

    if run_meta_stage:
        with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
            for key, doc, ran in pool.map(run_metadata, metas):
                result.metadata_reports[key] = doc
                if ran:
                    result.counters["metadata"] += 1

    # --- static stage: dependencies first so their summaries exist ---
    order = [key for scc in topo_order(result.graph) for key in sorted(scc)]
    for key in order if "static" in analyzers else ():
        meta = result.metas.get(key)
        if meta is None:
            continue  # dep outside the corpus; build_graph already warned
        cache_key = CacheKey(key, "static", STATIC_ANALYZER_VERSION, static_digest)
        cached = cache.get(cache_key)
        if cached is not None:
            result.static_reports[key] = cached
            continue
        dep_exports = {}
        for dep_key in result.graph.edges.get(key, ()):
            dep_report = result.static_reports.get(dep_key)
            if not dep_report:
                continue
            summaries = {
                name: func_summary_from_dict(doc)
                for name, doc in dep_report.get("exports", {}).items()
            }
            if not summaries:
                continue
            for import_name in _import_names(result.metas[dep_key]):
                dep_exports.setdefault(import_name, {}).update(summaries)
        try:
            report = analyze_package(meta, labels[meta.subject_language], dep_exports)
            result.static_reports[key] = report.to_dict()
            cache.put(cache_key, result.static_reports[key])
            result.counters["static"] += 1
        except PkgvetError as exc:
            result.errors.append((key, "static", str(exc)))

    # --- dynamic stage ---
    def run_dynamic(meta):
        key = meta.coordinate.key()
        cache_key = CacheKey(key, "dynamic", DYNAMIC_ANALYZER_VERSION, dynamic_digest)
        cached = cache.get(cache_key)
        if cached is not None:
            return key, cached, False, None
        error = None
        if meta.trace_path and Path(meta.trace_path).is_file():
            try:
                events = parse_trace(meta.trace_path)
                findings = classify_trace(key, events, meta.coordinate.registry, policies)
            except TraceMalformedError as exc:
                findings = DynamicFindings(coordinate=key, notes=(f"trace malformed: {exc}",))
                error = str(exc)
        else:
            findings = DynamicFindings(coordinate=key, notes=("no trace captured",))
        doc = findings.to_dict()
        cache.put(cache_key, doc)
        return key, doc, True, error

    if "dynamic" in analyzers:
        with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
            for key, doc, ran, error in pool.map(run_dynamic, metas):
                result.dynamic_reports[key] = doc
                if ran:
                    result.counters["dynamic"] += 1
                if error:
                    result.errors.append((key, "dynamic", error))

    # --- evaluation context assembly ---
    older_static = _older_version_reports(result)
    reachable = _transitive_deps(result.graph)
    engine = TriageEngine(ruleset, exclusions)
    engine.verdicts.update(verdicts)
    for key in sorted(result.metas):
        meta = result.metas[key]
        context, attributed = _build_context(result, key, older_static, reachable)
        result.contexts[key] = context
        result.attributed[key] = attributed
        engine.load_context(
            key,
            context,
            authors=meta.authors,
            amplified=amplified.get(key, meta.downloads),
            release_time=format_timestamp(meta.release_time),
        )
    engine.evaluate_all()
    result.engine = engine
    return result


def _load_verdicts(workspace) -> dict:
    if not workspace:
        return {}
    path = Path(workspace) / VERDICTS_FILE
    if not path.is_file():
        return {}
    return json.loads(path.read_text(encoding="utf-8"))


def _confirmed_overlay(verdicts, metas, malware) -> list:
    """Analyst MALICIOUS verdicts become known-malware records for the
    metadata pass of the next run, closing the triage loop."""
    known = {m.coordinate.key() for m in malware}
    extra = []
    for coord_key in sorted(verdicts):
        if verdicts[coord_key] != "MALICIOUS" or coord_key in known:
            continue
        meta = metas.get(coord_key)
        if meta is not None:
            extra.append(
                MalwareRecord(
                    coordinate=meta.coordinate,
                    authors=meta.authors,
                    release_time=meta.release_time,
                )
            )
    return extra


def _older_version_reports(result: PipelineResult) -> dict:
    """key -> static report dict of the next-older version in the corpus."""
    by_name = {}
    for key, meta in result.metas.items():
        by_name.setdefault((meta.coordinate.registry, meta.coordinate.name), []).append(
            meta.coordinate
        )
    out = {}
    for coords in by_name.values():
        if len(coords) < 2:
            continue
        try:
            coords.sort(key=functools.cmp_to_key(lambda a, b: compare(a.version, b.version)))
        except VersionOrderError:
            continue
        for older, newer in zip(coords, coords[1:]):
            older_report = result.static_reports.get(older.key())
            if older_report:
                out[newer.key()] = older_report
    return out


def _transitive_deps(graph) -> dict:
    out = {}
    for key in graph.nodes:
        seen = set()
        stack = list(graph.edges.get(key, ()))
        while stack:
            dep = stack.pop()
            if dep in seen or dep == key:
                continue
            seen.add(dep)
            stack.extend(graph.edges.get(dep, ()))
        out[key] = seen
    return out


def _build_context(result: PipelineResult, key: str, older_static: dict, reachable: dict):
    context = {}
    attributed = ()

    meta_doc = result.metadata_reports.get(key)
    if meta_doc:
        context["meta.typosquat_count"] = len(meta_doc.get("typosquat_of", ()))
        context["meta.cross_registry_count"] = sum(
            1 for hit in meta_doc.get("cross_registry_hits", ()) if hit[2]
        )
        context["meta.relations"] = frozenset(
            kind for _, kind in meta_doc.get("related_malware", ())
        )
        context["meta.binary_count"] = len(meta_doc.get("binary_flags", ()))

    static_doc = result.static_reports.get(key)
    if static_doc:
        context["static.has_install_hook"] = bool(
            static_doc.get("hook", {}).get("has_install_hook")
        )
        context["static.flow_pairs"] = frozenset(
            f"{src}->{dst}" for src, dst in static_doc.get("flow_pairs", ())
        )
        older = older_static.get(key)
        if older:
            try:
                diff = diff_api_categories(
                    static_report_from_dict(older), static_report_from_dict(static_doc)
                )
                context["static.added_categories"] = frozenset(diff["added_categories"])
            except VersionOrderError:
                pass

    dyn_doc = result.dynamic_reports.get(key)
    if dyn_doc:
        findings = dynamic_findings_from_dict(dyn_doc)
        dep_findings = [
            dynamic_findings_from_dict(result.dynamic_reports[dep])
            for dep in sorted(reachable.get(key, ()))
            if dep in result.dynamic_reports
        ]
        retained, attributed = attribute_findings(findings, dep_findings)
        for name, value in retained.counts().items():
            context[f"dynamic.{name}"] = value
    return context, attributed


# --- persisted run state for the CLI and the service ---

STATE_FILE = "state.json"
QUEUE_FILE = "queue.json"
EXCLUSIONS_FILE = "exclusions.ndjson"
VERDICTS_FILE = "verdicts.json"

_SET_FIELDS = {"meta.relations", "static.added_categories", "static.flow_pairs"}


def save_state(result: PipelineResult, workspace) -> None:
    from pkgvet.model import metadata_to_dict

    ws = Path(workspace)
    ws.mkdir(parents=True, exist_ok=True)
    state = {
        "metas": {k: metadata_to_dict(m) for k, m in sorted(result.metas.items())},
        "metadata_reports": result.metadata_reports,
        "static_reports": result.static_reports,
        "dynamic_reports": result.dynamic_reports,
        "attributed": {k: list(v) for k, v in result.attributed.items()},
        "contexts": {
            k: {f: (sorted(v) if isinstance(v, frozenset) else v) for f, v in ctx.items()}
            for k, ctx in result.contexts.items()
        },
        "counters": result.counters,
        "errors": [list(e) for e in result.errors],
        "amplified": {k: result.engine.meta[k]["amplified"] for k in result.engine.meta}
        if result.engine
        else {},
    }
    (ws / STATE_FILE).write_text(json.dumps(state, indent=1, sort_keys=True), encoding="utf-8")
    if result.engine:
        (ws / QUEUE_FILE).write_text(result.engine.export_queue(), encoding="utf-8")


def load_state(workspace, rules_path=None) -> PipelineResult:
    """Rebuild a PipelineResult + engine from a saved analyze run."""
    from pkgvet.model import metadata_from_dict

    ws = Path(workspace)
    doc = json.loads((ws / STATE_FILE).read_text(encoding="utf-8"))
    result = PipelineResult()
    result.metas = {k: metadata_from_dict(m) for k, m in doc["metas"].items()}
    result.metadata_reports = doc["metadata_reports"]
    result.static_reports = doc["static_reports"]
    result.dynamic_reports = doc["dynamic_reports"]
    result.attributed = {k: tuple(v) for k, v in doc.get("attributed", {}).items()}
    result.counters = doc.get("counters", {})
    result.errors = [tuple(e) for e in doc.get("errors", ())]
    result.contexts = {
        k: {f: (frozenset(v) if f in _SET_FIELDS else v) for f, v in ctx.items()}
        for k, ctx in doc["contexts"].items()
    }
    ruleset = RuleSet.load(rules_path)
    exclusions = ExclusionLog(ws / EXCLUSIONS_FILE)
    engine = TriageEngine(ruleset, exclusions)
    amplified = doc.get("amplified", {})
    for key, meta in sorted(result.metas.items()):
        engine.load_context(
            key,
            result.contexts.get(key, {}),
            authors=meta.authors,
            amplified=amplified.get(key, meta.downloads),
            release_time=format_timestamp(meta.release_time),
        )
    verdicts_path = ws / VERDICTS_FILE
    if verdicts_path.is_file():
        engine.verdicts.update(json.loads(verdicts_path.read_text(encoding="utf-8")))
    engine.evaluate_all()
    result.engine = engine
    return result


def save_verdicts(engine: TriageEngine, workspace) -> None:
    ws = Path(workspace)
    ws.mkdir(parents=True, exist_ok=True)
    (ws / VERDICTS_FILE).write_text(
        json.dumps(engine.verdicts, indent=1, sort_keys=True), encoding="utf-8"
    )
    (ws / QUEUE_FILE).write_text(engine.export_queue(), encoding="utf-8")
