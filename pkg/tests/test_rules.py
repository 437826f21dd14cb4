"""Rule predicates, the default rule set, exclusions, and labeling."""

import json

import pytest

from pkgvet.errors import ConfigInvalidError, UnknownReportError
from pkgvet.rules.engine import (
    Exclusion,
    ExclusionLog,
    RuleSet,
    TriageEngine,
    STATUS_CLEAN,
    STATUS_CONFIRMED_BENIGN,
    STATUS_CONFIRMED_MALICIOUS,
    STATUS_EXCLUDED,
    STATUS_FLAGGED,
)
from pkgvet.rules.predicates import compile_predicate, empty_context

EXPECTED_RULE_IDS = [
    "M_TYPOSQUAT", "M_CROSS_REGISTRY", "M_MALWARE_RELATION", "M_RELEASE_WINDOW",
    "M_EMBEDDED_BINARY", "S_INSTALL_HOOK", "S_NEW_RISKY_APIS", "S_EXFIL_FLOW",
    "S_DOWNLOAD_EXEC_FLOW", "D_UNEXPECTED_ENDPOINT", "D_SENSITIVE_READ",
    "D_SENSITIVE_WRITE", "D_UNEXPECTED_PROCESS",
]

# each entry: minimal context in which exactly that one rule fires
SINGLE_RULE_CONTEXTS = {
    "M_TYPOSQUAT": {"meta.typosquat_count": 1},
    "M_CROSS_REGISTRY": {"meta.cross_registry_count": 1},
    "M_MALWARE_RELATION": {"meta.relations": frozenset({"SHARED_AUTHOR"})},
    "M_RELEASE_WINDOW": {"meta.relations": frozenset({"RELEASE_WINDOW"})},
    "M_EMBEDDED_BINARY": {"meta.binary_count": 2},
    "S_INSTALL_HOOK": {"static.has_install_hook": True},
    "S_NEW_RISKY_APIS": {"static.added_categories": frozenset({"PROCESS"})},
    "S_EXFIL_FLOW": {"static.flow_pairs": frozenset({"FILESYSTEM->NETWORK"})},
    "S_DOWNLOAD_EXEC_FLOW": {"static.flow_pairs": frozenset({"NETWORK->CODEGEN"})},
    "D_UNEXPECTED_ENDPOINT": {"dynamic.unexpected_endpoint_count": 3},
    "D_SENSITIVE_READ": {"dynamic.sensitive_read_count": 1},
    "D_SENSITIVE_WRITE": {"dynamic.sensitive_write_count": 1},
    "D_UNEXPECTED_PROCESS": {"dynamic.unexpected_process_count": 1},
}


@pytest.fixture(scope="module")
def ruleset():
    return RuleSet.load()


# --- predicate language ---

def test_comparison_ops():
    ctx = empty_context()
    ctx["meta.typosquat_count"] = 2
    assert compile_predicate("meta.typosquat_count > 1").evaluate(ctx)
    assert compile_predicate("meta.typosquat_count >= 2").evaluate(ctx)
    assert not compile_predicate("meta.typosquat_count < 2").evaluate(ctx)
    assert compile_predicate("meta.typosquat_count != 0").evaluate(ctx)
    assert compile_predicate("meta.typosquat_count == 2").evaluate(ctx)


def test_contains_and_junctions():
    ctx = empty_context()
    ctx["meta.relations"] = frozenset({"SHARED_AUTHOR"})
    ctx["static.has_install_hook"] = True
    p = compile_predicate(
        '(meta.relations contains "SHARED_AUTHOR" OR meta.relations contains "DEPENDS_ON") '
        "AND static.has_install_hook == true"
    )
    assert p.evaluate(ctx)
    ctx["static.has_install_hook"] = False
    assert not p.evaluate(ctx)


def test_and_binds_tighter_than_or():
    ctx = empty_context()
    ctx["meta.typosquat_count"] = 1
    # reads as: typosquat>0 OR (cross>0 AND binary>0); the left arm carries it
    p = compile_predicate(
        "meta.typosquat_count > 0 OR meta.cross_registry_count > 0 AND meta.binary_count > 0"
    )
    assert p.evaluate(ctx)


@pytest.mark.parametrize("bad", [
    "meta.nonexistent > 0",
    "meta.typosquat_count contains \"x\"",
    "meta.relations > 3",
    "static.has_install_hook == 1",
    "meta.typosquat_count >",
    "meta.typosquat_count > 0 extra",
    "",
    "(meta.typosquat_count > 0",
])
def test_bad_predicates_rejected(bad):
    with pytest.raises(ConfigInvalidError):
        compile_predicate(bad)


# --- default rule set ---

def test_default_ruleset_ids(ruleset):
    assert [r.rule_id for r in ruleset.rules] == EXPECTED_RULE_IDS


def test_each_minimal_context_fires_exactly_its_rule(ruleset):
    for rule_id, partial in SINGLE_RULE_CONTEXTS.items():
        fired = ruleset.evaluate(partial)
        assert fired == [rule_id], f"{rule_id}: fired {fired}"


def test_empty_context_fires_nothing(ruleset):
    assert ruleset.evaluate({}) == []


def test_unknown_field_in_rule_config():
    doc = [{"id": "X", "predicate": "bogus.field > 0"}]
    with pytest.raises(ConfigInvalidError):
        RuleSet.from_doc(doc)


def test_duplicate_rule_id_rejected():
    doc = [
        {"id": "X", "predicate": "meta.binary_count > 0"},
        {"id": "X", "predicate": "meta.typosquat_count > 0"},
    ]
    with pytest.raises(ConfigInvalidError):
        RuleSet.from_doc(doc)


# --- engine: statuses, exclusions, labels ---

def _engine(ruleset, contexts):
    engine = TriageEngine(ruleset)
    for coord, (ctx, authors, amplified, release) in contexts.items():
        engine.load_context(coord, ctx, authors=authors, amplified=amplified, release_time=release)
    engine.evaluate_all()
    return engine


def test_statuses(ruleset):
    engine = _engine(ruleset, {
        "npm:clean:1.0.0": ({}, ("a",), 10, "2026-01-01T00:00:00Z"),
        "npm:hooky:1.0.0": ({"static.has_install_hook": True}, ("b",), 20, "2026-01-02T00:00:00Z"),
    })
    assert engine.reports["npm:clean:1.0.0"].status == STATUS_CLEAN
    assert engine.reports["npm:hooky:1.0.0"].status == STATUS_FLAGGED
    assert [r.coordinate for r in engine.queue()] == ["npm:hooky:1.0.0"]


def test_coordinate_exclusion_empties_report(ruleset):
    engine = _engine(ruleset, {
        "npm:hooky:1.0.0": ({"static.has_install_hook": True}, ("b",), 0, ""),
    })
    engine.exclusions.append(Exclusion(scope="coordinate", target="npm:hooky:1.0.0"))
    engine.evaluate_all()
    assert engine.reports["npm:hooky:1.0.0"].status == STATUS_EXCLUDED
    assert engine.queue() == []


def test_rule_scope_excludes_only_that_trigger(ruleset):
    ctx = {"static.has_install_hook": True, "meta.binary_count": 1}
    engine = _engine(ruleset, {"npm:two:1.0.0": (ctx, ("b",), 0, "")})
    engine.exclusions.append(Exclusion(scope="rule", target="npm:two:1.0.0", rule_id="S_INSTALL_HOOK"))
    engine.evaluate_all()
    report = engine.reports["npm:two:1.0.0"]
    assert report.status == STATUS_FLAGGED  # the binary trigger still stands
    assert report.rule_ids() == ["M_EMBEDDED_BINARY"]
    assert report.rule_ids(include_excluded=True) == ["M_EMBEDDED_BINARY", "S_INSTALL_HOOK"]
    assert report.score == 1.0


def test_author_scope_covers_other_packages(ruleset):
    engine = _engine(ruleset, {
        "npm:one:1.0.0": ({"static.has_install_hook": True}, ("toolsmith",), 0, ""),
        "npm:two:1.0.0": ({"meta.binary_count": 1}, ("toolsmith",), 0, ""),
    })
    engine.exclusions.append(Exclusion(scope="author", target="toolsmith"))
    engine.evaluate_all()
    assert engine.reports["npm:one:1.0.0"].status == STATUS_EXCLUDED
    assert engine.reports["npm:two:1.0.0"].status == STATUS_EXCLUDED


def test_benign_label_excludes_and_confirms(ruleset):
    engine = _engine(ruleset, {
        "npm:fp:1.0.0": ({"static.has_install_hook": True}, ("b",), 0, ""),
    })
    report = engine.apply_label("npm:fp:1.0.0", "BENIGN", note="reviewed, build step is legit")
    assert report.status == STATUS_CONFIRMED_BENIGN
    assert engine.queue() == []
    # idempotent: same label twice leaves one exclusion entry
    engine.apply_label("npm:fp:1.0.0", "BENIGN", note="reviewed, build step is legit")
    assert len(engine.exclusions.entries) == 1


def test_malicious_label_confirms_and_lists(ruleset):
    engine = _engine(ruleset, {
        "npm:evil:1.0.0": ({"static.has_install_hook": True}, ("e",), 0, ""),
    })
    report = engine.apply_label("npm:evil:1.0.0", "MALICIOUS")
    assert report.status == STATUS_CONFIRMED_MALICIOUS
    assert engine.confirmed_malicious() == ["npm:evil:1.0.0"]
    assert engine.queue(statuses=(STATUS_CONFIRMED_MALICIOUS,))[0].coordinate == "npm:evil:1.0.0"


def test_label_unknown_coordinate(ruleset):
    engine = _engine(ruleset, {})
    with pytest.raises(UnknownReportError):
        engine.apply_label("npm:ghost:1.0.0", "BENIGN")


def test_label_validation(ruleset):
    engine = _engine(ruleset, {"npm:x:1.0.0": ({"meta.binary_count": 1}, (), 0, "")})
    with pytest.raises(ConfigInvalidError):
        engine.apply_label("npm:x:1.0.0", "SHRUG")
    with pytest.raises(ConfigInvalidError):
        engine.apply_label("npm:x:1.0.0", "BENIGN", scope="rule")  # rule scope needs rule_id
    with pytest.raises(ConfigInvalidError):
        engine.apply_label("npm:x:1.0.0", "BENIGN", scope="rule", rule_id="NOPE")


# --- ranking ---

def test_rank_order_and_determinism(ruleset):
    base = "2026-01-0{d}T00:00:00Z"
    engine = _engine(ruleset, {
        # two triggers beat one
        "npm:big:1.0.0": ({"static.has_install_hook": True, "meta.binary_count": 1}, (), 5, base.format(d=1)),
        # equal score: amplified downloads break the tie
        "npm:wide:1.0.0": ({"static.has_install_hook": True}, (), 1000, base.format(d=1)),
        "npm:narrow:1.0.0": ({"static.has_install_hook": True}, (), 10, base.format(d=1)),
        # equal score and reach: newer first
        "npm:newer:1.0.0": ({"meta.binary_count": 1}, (), 10, base.format(d=5)),
    })
    order = [r.coordinate for r in engine.queue()]
    assert order[0] == "npm:big:1.0.0"
    assert order.index("npm:wide:1.0.0") < order.index("npm:narrow:1.0.0")
    assert order.index("npm:newer:1.0.0") < order.index("npm:narrow:1.0.0")

    export_a = engine.export_queue()
    engine.evaluate_all()
    export_b = engine.export_queue()
    assert export_a == export_b


def test_gray_rules_sort_below_solid_signal():
    doc = [
        {"id": "SOLID", "predicate": "meta.binary_count > 0", "weight": 1.0},
        {"id": "GRAY_A", "predicate": "meta.typosquat_count > 0", "weight": 1.0, "gray": True},
        {"id": "GRAY_B", "predicate": "meta.cross_registry_count > 0", "weight": 1.0, "gray": True},
    ]
    engine = _engine(RuleSet.from_doc(doc), {
        "npm:gray2:1.0.0": ({"meta.typosquat_count": 1, "meta.cross_registry_count": 1}, (), 0, ""),
        "npm:solid1:1.0.0": ({"meta.binary_count": 1}, (), 0, ""),
    })
    order = [r.coordinate for r in engine.queue()]
    # score 1.0 with non-gray signal outranks score 2.0 of pure gray noise
    assert order == ["npm:solid1:1.0.0", "npm:gray2:1.0.0"]


# --- stats ---

def test_rule_stats_counts(ruleset):
    engine = _engine(ruleset, {
        "npm:evil:1.0.0": ({"static.has_install_hook": True}, (), 0, ""),
        "npm:fp:1.0.0": ({"static.has_install_hook": True}, (), 0, ""),
        "npm:open:1.0.0": ({"static.has_install_hook": True}, (), 0, ""),
    })
    engine.apply_label("npm:evil:1.0.0", "MALICIOUS")
    engine.apply_label("npm:fp:1.0.0", "BENIGN")
    stats = engine.rule_stats()
    assert stats["S_INSTALL_HOOK"] == {"triggers": 3, "tp": 1, "fp": 1}
    assert stats["M_TYPOSQUAT"] == {"triggers": 0, "tp": 0, "fp": 0}


# --- exclusion log persistence ---

def test_exclusion_log_round_trip(tmp_path):
    path = tmp_path / "exclusions.ndjson"
    log = ExclusionLog(path)
    log.append(Exclusion(scope="coordinate", target="npm:x:1.0.0", note="fp"))
    log.append(Exclusion(scope="rule", target="npm:y:1.0.0", rule_id="S_INSTALL_HOOK"))
    log.append(Exclusion(scope="coordinate", target="npm:x:1.0.0", note="fp"))  # dedup
    reloaded = ExclusionLog(path)
    assert reloaded.entries == log.entries
    assert len(reloaded.entries) == 2


def test_exclusion_log_bad_line(tmp_path):
    path = tmp_path / "exclusions.ndjson"
    path.write_text('{"scope": "coordinate"}\n')
    with pytest.raises(ConfigInvalidError):
        ExclusionLog(path)


# --- verdict feedback into relations ---

def test_malicious_verdict_creates_shared_author_trigger(ruleset):
    engine = _engine(ruleset, {
        "pypi:probe:0.3.1": (
            {"dynamic.sensitive_read_count": 1},
            ("dev-telemetry-labs",), 50, "2026-02-10T00:00:00Z",
        ),
        "pypi:mathkit:2.4.0": ({}, ("dev-telemetry-labs",), 90, "2026-03-22T00:00:00Z"),
        "pypi:other:1.0.0": ({}, ("someone-else",), 10, "2026-03-01T00:00:00Z"),
    })
    assert engine.reports["pypi:mathkit:2.4.0"].status == STATUS_CLEAN

    engine.apply_label("pypi:probe:0.3.1", "MALICIOUS")
    engine.evaluate_all()
    sibling = engine.reports["pypi:mathkit:2.4.0"]
    assert sibling.status == STATUS_FLAGGED
    assert sibling.rule_ids() == ["M_MALWARE_RELATION"]
    # the confirmed package itself stays confirmed, not re-flagged
    assert engine.reports["pypi:probe:0.3.1"].status == STATUS_CONFIRMED_MALICIOUS
    # unrelated authors untouched
    assert engine.reports["pypi:other:1.0.0"].status == STATUS_CLEAN


def test_verdict_feedback_does_not_mutate_stored_context(ruleset):
    engine = _engine(ruleset, {
        "npm:a:1.0.0": ({"static.has_install_hook": True}, ("mal",), 0, ""),
        "npm:b:1.0.0": ({}, ("mal",), 0, ""),
    })
    engine.apply_label("npm:a:1.0.0", "MALICIOUS")
    engine.evaluate_all()
    assert "meta.relations" not in engine.contexts["npm:b:1.0.0"]
    assert engine.reports["npm:b:1.0.0"].rule_ids() == ["M_MALWARE_RELATION"]
