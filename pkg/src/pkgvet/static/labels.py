"""Labeled runtime APIs: the source/sink vocabulary for each language.

A label names one runtime API (dotted path; Ruby's :: folds to .) and
says what it touches (NETWORK, FILESYSTEM, PROCESS, CODEGEN), whether
it produces attacker-relevant data (SOURCE), consumes it dangerously
(SINK), or both, and how call sites are matched:

  GLOBAL_NAME       bare identifier call, e.g. eval(x)
  QUALIFIED_STATIC  full dotted path after alias resolution,
                    e.g. https.get, subprocess.Popen, Net::HTTP.post
  INSTANCE_METHOD   method on an instance; matched by method name
                    (low confidence) or by a receiver seen constructed
                    from the label's class path (normal confidence)

PROCESS and CODEGEN are sink-only: spawning and code loading consume
input, they do not produce tainted data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from pkgvet.errors import ConfigInvalidError
from pkgvet.model import SubjectLanguage


class Category(str, Enum):
    NETWORK = "NETWORK"
    FILESYSTEM = "FILESYSTEM"
    PROCESS = "PROCESS"
    CODEGEN = "CODEGEN"


class Role(str, Enum):
    SOURCE = "SOURCE"
    SINK = "SINK"


class MatchMode(str, Enum):
    GLOBAL_NAME = "GLOBAL_NAME"
    QUALIFIED_STATIC = "QUALIFIED_STATIC"
    INSTANCE_METHOD = "INSTANCE_METHOD"


@dataclass(frozen=True)
class ApiLabel:
    subject_language: SubjectLanguage
    qualified_name: str
    category: Category
    roles: frozenset
    match_mode: MatchMode

    def key(self) -> tuple:
        return (self.subject_language.value, self.qualified_name)

    def method_name(self) -> str:
        return self.qualified_name.rsplit(".", 1)[-1]

    def class_path(self) -> str:
        return self.qualified_name.rsplit(".", 1)[0] if "." in self.qualified_name else ""

    def to_dict(self) -> dict:
        return {
            "language": self.subject_language.value,
            "qualified_name": self.qualified_name,
            "category": self.category.value,
            "roles": sorted(r.value for r in self.roles),
            "match_mode": self.match_mode.value,
        }


class ApiLabelSet:
    """Labels for one language, indexed for the three match modes."""

    def __init__(self, language: SubjectLanguage, labels):
        self.language = language
        self.labels = tuple(labels)
        self.by_qualified = {}
        self.by_global = {}
        self.by_method = {}
        for label in self.labels:
            self.by_qualified[label.qualified_name] = label
            if label.match_mode is MatchMode.GLOBAL_NAME:
                self.by_global[label.qualified_name] = label
            elif label.match_mode is MatchMode.INSTANCE_METHOD:
                self.by_method.setdefault(label.method_name(), []).append(label)

    def __iter__(self):
        return iter(self.labels)

    def __len__(self):
        return len(self.labels)


def _parse_row(doc: dict, row: int) -> ApiLabel:
    for field in ("language", "qualified_name", "category", "roles", "match_mode"):
        if field not in doc:
            raise ConfigInvalidError(f"missing field {field!r}", row=row)
    try:
        language = SubjectLanguage(doc["language"])
        category = Category(doc["category"])
        roles = frozenset(Role(r) for r in doc["roles"])
        mode = MatchMode(doc["match_mode"])
    except ValueError as exc:
        raise ConfigInvalidError(str(exc), row=row) from exc
    name = doc["qualified_name"].replace("::", ".")
    if not name:
        raise ConfigInvalidError("empty qualified_name", row=row)
    if not roles:
        raise ConfigInvalidError(f"{name}: roles must be non-empty", row=row)
    if category in (Category.PROCESS, Category.CODEGEN) and roles != frozenset({Role.SINK}):
        raise ConfigInvalidError(f"{name}: {category.value} labels are SINK-only", row=row)
    return ApiLabel(language, name, category, roles, mode)


def load_api_labels(path: str | Path) -> dict:
    """Load one label config file: a JSON array of rows.

    Returns {SubjectLanguage: ApiLabelSet}. Row numbers in errors are
    1-based positions in the array.
    """
    try:
        rows = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalidError(f"{path}: {exc}") from exc
    if not isinstance(rows, list):
        raise ConfigInvalidError(f"{path}: top level must be an array")
    labels = []
    seen = set()
    for i, doc in enumerate(rows, 1):
        label = _parse_row(doc, i)
        if label.key() in seen:
            raise ConfigInvalidError(f"duplicate qualified_name {label.qualified_name!r}", row=i)
        seen.add(label.key())
        labels.append(label)
    out = {}
    for language in SubjectLanguage:
        subset = [l for l in labels if l.subject_language is language]
        out[language] = ApiLabelSet(language, subset)
    return out


def load_default_labels() -> dict:
    """The shipped seed label sets (configs/api_labels.json)."""
    return load_api_labels(Path(__file__).parent.parent / "configs" / "api_labels.json")
