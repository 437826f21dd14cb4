"""Install-time hook detection.

Each registry has its own way to run code during installation: npm
lifecycle scripts, a Python build script, gem native-extension build
files. Detection is structural (what the manifest wires up), not
behavioral; the dynamic stage owns what actually runs.
"""

from __future__ import annotations

import ast
import json
from dataclasses import dataclass
from pathlib import Path

from pkgvet.model import Registry

_NPM_HOOK_KEYS = ("preinstall", "install", "postinstall")


@dataclass(frozen=True)
class HookInfo:
    has_install_hook: bool
    mechanisms: tuple = ()  # e.g. "npm-script:postinstall", "setup-py", "gemspec-extension"
    scripts: tuple = ()  # package-relative files the hook runs

    def to_dict(self) -> dict:
        return {
            "has_install_hook": self.has_install_hook,
            "mechanisms": list(self.mechanisms),
            "scripts": list(self.scripts),
        }


def hook_info_from_dict(doc: dict) -> HookInfo:
    return HookInfo(
        has_install_hook=doc["has_install_hook"],
        mechanisms=tuple(doc.get("mechanisms", ())),
        scripts=tuple(doc.get("scripts", ())),
    )


def _script_refs(command: str) -> list:
    return [tok for tok in command.replace('"', " ").replace("'", " ").split() if tok.endswith(".js")]


def _detect_npm(root: Path) -> HookInfo:
    manifest = root / "package.json"
    if not manifest.is_file():
        return HookInfo(False)
    try:
        doc = json.loads(manifest.read_text(encoding="utf-8"))
    except (ValueError, UnicodeDecodeError):
        return HookInfo(True, mechanisms=("npm-manifest-unparseable",))
    scripts = doc.get("scripts") or {}
    mechanisms = []
    refs = []
    for key in _NPM_HOOK_KEYS:
        if key in scripts:
            mechanisms.append(f"npm-script:{key}")
            refs.extend(_script_refs(str(scripts[key])))
    if "gypfile" in doc or (root / "binding.gyp").is_file():
        mechanisms.append("node-gyp-build")
    return HookInfo(bool(mechanisms), tuple(mechanisms), tuple(sorted(set(refs))))


_SETUP_CALL_NAMES = {"setup", "find_packages", "find_namespace_packages"}


def _literal_ish(node) -> bool:
    if isinstance(node, ast.Constant):
        return True
    if isinstance(node, (ast.List, ast.Tuple, ast.Set)):
        return all(_literal_ish(e) for e in node.elts)
    if isinstance(node, ast.Dict):
        return all(v is not None and _literal_ish(v) for v in node.values)
    if isinstance(node, ast.Name):
        return True
    if isinstance(node, ast.JoinedStr):
        return True
    if isinstance(node, ast.Call):
        return _call_name(node) in _SETUP_CALL_NAMES
    return False


def _call_name(call: ast.Call) -> str:
    fn = call.func
    if isinstance(fn, ast.Name):
        return fn.id
    if isinstance(fn, ast.Attribute):
        return fn.attr
    return ""


def _setup_call_is_plain(call: ast.Call) -> bool:
    for kw in call.keywords:
        if kw.arg == "cmdclass":
            return False
    return True


def _declarative(stmts) -> bool:
    for st in stmts:
        if isinstance(st, (ast.Import, ast.ImportFrom)):
            continue
        if isinstance(st, (ast.Assign, ast.AnnAssign)):
            value = st.value
            if value is not None and _literal_ish(value):
                continue
            return False
        if isinstance(st, ast.Expr):
            if isinstance(st.value, ast.Call) and _call_name(st.value) in _SETUP_CALL_NAMES:
                if _setup_call_is_plain(st.value):
                    continue
            if isinstance(st.value, ast.Constant):  # docstring
                continue
            return False
        if isinstance(st, ast.If):
            # the __main__ guard wrapping the setup call
            if _declarative(st.body) and _declarative(st.orelse):
                continue
            return False
        return False
    return True


def _detect_pypi(root: Path) -> HookInfo:
    setup_py = root / "setup.py"
    if not setup_py.is_file():
        return HookInfo(False)
    try:
        tree = ast.parse(setup_py.read_text(encoding="utf-8"))
    except (SyntaxError, ValueError, UnicodeDecodeError):
        return HookInfo(True, mechanisms=("setup-py-unparseable",), scripts=("setup.py",))
    if _declarative(tree.body):
        return HookInfo(False)
    return HookInfo(True, mechanisms=("setup-py",), scripts=("setup.py",))


def _detect_rubygems(root: Path) -> HookInfo:
    mechanisms = []
    scripts = []
    for ext in sorted(root.rglob("extconf.rb")):
        mechanisms.append("gem-extension")
        scripts.append(str(ext.relative_to(root)))
    for spec in sorted(root.glob("*.gemspec")):
        try:
            text = spec.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError):
            continue
        if ".extensions" in text and "=" in text:
            mechanisms.append("gemspec-extension")
    return HookInfo(bool(mechanisms), tuple(dict.fromkeys(mechanisms)), tuple(scripts))


def detect_install_hook(source_root, registry: Registry) -> HookInfo:
    root = Path(source_root)
    if not root.is_dir():
        return HookInfo(False)
    if registry is Registry.NPM:
        return _detect_npm(root)
    if registry is Registry.PYPI:
        return _detect_pypi(root)
    return _detect_rubygems(root)
