"""Core domain types: coordinates, metadata, file inventory.

All types are immutable after construction and safe to share between
workers. Serialization helpers keep key order stable so that anything
derived from these documents (graphs, cache digests, queue exports) is
byte-reproducible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from pkgvet.errors import SchemaError


class Registry(str, Enum):
    PYPI = "pypi"
    NPM = "npm"
    RUBYGEMS = "rubygems"


class SubjectLanguage(str, Enum):
    PY = "py"
    JS = "js"
    RB = "rb"


LANGUAGE_FOR_REGISTRY = {
    Registry.PYPI: SubjectLanguage.PY,
    Registry.NPM: SubjectLanguage.JS,
    Registry.RUBYGEMS: SubjectLanguage.RB,
}

SOURCE_EXTENSIONS = {
    SubjectLanguage.PY: (".py",),
    SubjectLanguage.JS: (".js", ".mjs", ".cjs"),
    SubjectLanguage.RB: (".rb",),
}


class DepKind(str, Enum):
    RUNTIME = "runtime"
    DEV = "dev"


class FileKind(str, Enum):
    SOURCE = "SOURCE"
    NATIVE_EXT = "NATIVE_EXT"
    PE_BINARY = "PE_BINARY"
    ELF_BINARY = "ELF_BINARY"
    OTHER = "OTHER"


_PYPI_SEPARATORS = re.compile(r"[-_.]+")


def canonical_name(registry: Registry, name: str) -> str:
    """Registry-canonical package name used for identity and comparison.

    PyPI folds runs of ``-``, ``_`` and ``.`` into a single ``-`` (PEP 503
    convention); all registries compare case-insensitively.
    """
    name = name.strip().lower()
    if registry is Registry.PYPI:
        name = _PYPI_SEPARATORS.sub("-", name)
    return name


@dataclass(frozen=True, order=True)
class PackageCoordinate:
    registry: Registry
    name: str
    version: str

    def __post_init__(self):
        if not self.name:
            raise SchemaError("package name must be non-empty")
        object.__setattr__(self, "name", canonical_name(self.registry, self.name))

    def key(self) -> str:
        return f"{self.registry.value}:{self.name}:{self.version}"

    @classmethod
    def parse(cls, key: str) -> "PackageCoordinate":
        parts = key.split(":", 2)
        if len(parts) != 3:
            raise SchemaError(f"bad coordinate key {key!r}, want registry:name:version")
        return cls(Registry(parts[0]), parts[1], parts[2])

    def sort_key(self) -> tuple[str, str, str]:
        return (self.registry.value, self.name, self.version)


@dataclass(frozen=True)
class Dependency:
    name: str
    constraint: str
    kind: DepKind


@dataclass(frozen=True)
class FileEntry:
    path: str
    byte_size: int
    kind: FileKind
    magic_prefix: str  # hex of the first 8 bytes, uppercase

    def __post_init__(self):
        is_pe = self.magic_prefix.startswith("4D5A")
        is_elf = self.magic_prefix.startswith("7F454C46")
        if (self.kind is FileKind.PE_BINARY) != is_pe:
            raise SchemaError(f"{self.path}: PE_BINARY kind must match 4D5A magic")
        if (self.kind is FileKind.ELF_BINARY) != is_elf:
            raise SchemaError(f"{self.path}: ELF_BINARY kind must match 7F454C46 magic")


@dataclass(frozen=True)
class PackageMetadata:
    coordinate: PackageCoordinate
    authors: tuple[str, ...]
    release_time: datetime
    downloads: int
    declared_deps: tuple[Dependency, ...]
    subject_language: SubjectLanguage
    file_inventory: tuple[FileEntry, ...] = ()
    notes: tuple[str, ...] = ()  # provenance notes, e.g. missing download counts
    source_root: str | None = None  # extracted package tree, when available
    trace_path: str | None = None  # normalized trace file, when available

    def __post_init__(self):
        if self.downloads < 0:
            raise SchemaError(f"{self.coordinate.key()}: downloads must be >= 0")
        if self.release_time.tzinfo is None:
            object.__setattr__(
                self, "release_time", self.release_time.replace(tzinfo=timezone.utc)
            )
        for dep in self.declared_deps:
            if canonical_name(self.coordinate.registry, dep.name) == self.coordinate.name:
                raise SchemaError(f"{self.coordinate.key()}: declared_deps contains a self-reference")

    def runtime_deps(self) -> tuple[Dependency, ...]:
        return tuple(d for d in self.declared_deps if d.kind is DepKind.RUNTIME)


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 UTC timestamp; 'Z' suffix accepted."""
    try:
        ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError as exc:
        raise SchemaError(f"bad timestamp {value!r}: {exc}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def metadata_to_dict(meta: PackageMetadata) -> dict:
    return {
        "registry": meta.coordinate.registry.value,
        "name": meta.coordinate.name,
        "version": meta.coordinate.version,
        "authors": list(meta.authors),
        "release_time": format_timestamp(meta.release_time),
        "downloads": meta.downloads,
        "dependencies": [
            {"name": d.name, "constraint": d.constraint, "kind": d.kind.value}
            for d in meta.declared_deps
        ],
        "subject_language": meta.subject_language.value,
        "files": [
            {
                "path": f.path,
                "byte_size": f.byte_size,
                "kind": f.kind.value,
                "magic_prefix": f.magic_prefix,
            }
            for f in meta.file_inventory
        ],
        "notes": list(meta.notes),
        "source_root": meta.source_root,
        "trace_path": meta.trace_path,
    }


def metadata_from_dict(doc: dict) -> PackageMetadata:
    try:
        coord = PackageCoordinate(Registry(doc["registry"]), doc["name"], doc["version"])
        deps = tuple(
            Dependency(d["name"], d.get("constraint", "*"), DepKind(d.get("kind", "runtime")))
            for d in doc.get("dependencies", [])
        )
        files = tuple(
            FileEntry(f["path"], f["byte_size"], FileKind(f["kind"]), f["magic_prefix"])
            for f in doc.get("files", [])
        )
        return PackageMetadata(
            coordinate=coord,
            authors=tuple(doc.get("authors", [])),
            release_time=parse_timestamp(doc["release_time"]),
            downloads=int(doc.get("downloads", 0)),
            declared_deps=deps,
            subject_language=SubjectLanguage(
                doc.get("subject_language", LANGUAGE_FOR_REGISTRY[coord.registry].value)
            ),
            file_inventory=files,
            notes=tuple(doc.get("notes", [])),
            source_root=doc.get("source_root"),
            trace_path=doc.get("trace_path"),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise SchemaError(f"bad metadata document: {exc}") from exc
