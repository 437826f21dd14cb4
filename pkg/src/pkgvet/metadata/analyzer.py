"""Metadata findings: typosquats, cross-registry masking, malware
correlation, and embedded binaries.

Everything here is a pure function of its inputs; identical inputs
give identical findings, and no state is kept between packages.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from pkgvet.model import (
    FileEntry,
    FileKind,
    PackageCoordinate,
    PackageMetadata,
    Registry,
    canonical_name,
    format_timestamp,
)
from pkgvet.distance import edit_distance
from pkgvet.versions import satisfies

METADATA_ANALYZER_VERSION = "1.0.0"


@dataclass(frozen=True)
class MetadataConfig:
    # distance threshold scales with name length: short names tolerate
    # only one edit before the match is meaningless
    short_name_len: int = 6
    threshold_short: int = 1
    threshold_long: int = 2
    popularity_floor: int = 10_000
    release_window_days: int = 7

    def threshold_for(self, name: str) -> int:
        return self.threshold_short if len(name) <= self.short_name_len else self.threshold_long

    def to_config_doc(self) -> dict:
        return {
            "short_name_len": self.short_name_len,
            "threshold_short": self.threshold_short,
            "threshold_long": self.threshold_long,
            "popularity_floor": self.popularity_floor,
            "release_window_days": self.release_window_days,
        }


@dataclass(frozen=True)
class MetadataFindings:
    coordinate: PackageCoordinate
    typosquat_of: tuple = ()  # (popular name, distance)
    cross_registry_hits: tuple = ()  # (registry, name, author_mismatch)
    related_malware: tuple = ()  # (malware key, relation)
    binary_flags: tuple = ()  # FileEntry

    def to_dict(self) -> dict:
        return {
            "coordinate": self.coordinate.key(),
            "typosquat_of": [[n, d] for n, d in self.typosquat_of],
            "cross_registry_hits": [[r, n, m] for r, n, m in self.cross_registry_hits],
            "related_malware": [[k, rel] for k, rel in self.related_malware],
            "binary_flags": [
                {"path": f.path, "byte_size": f.byte_size, "kind": f.kind.value, "magic_prefix": f.magic_prefix}
                for f in self.binary_flags
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MetadataFindings":
        return cls(
            coordinate=PackageCoordinate.parse(doc["coordinate"]),
            typosquat_of=tuple((n, d) for n, d in doc["typosquat_of"]),
            cross_registry_hits=tuple((r, n, m) for r, n, m in doc["cross_registry_hits"]),
            related_malware=tuple((k, rel) for k, rel in doc["related_malware"]),
            binary_flags=tuple(
                FileEntry(f["path"], f["byte_size"], FileKind(f["kind"]), f["magic_prefix"])
                for f in doc["binary_flags"]
            ),
        )


def find_typosquats(coord: PackageCoordinate, authors, popular, cfg: MetadataConfig):
    """Popular names within edit distance of this package's name.

    The popular list carries (name, downloads, authors); entries below
    the popularity floor are ignored. A package that IS one of the
    popular names, or that shares an author with the near-miss target,
    produces no hit. Raw-name aliases that canonicalize identically
    (distance 0 with different spelling) count as distance 1.
    """
    name = coord.name
    own_authors = {a.lower() for a in authors}
    eligible = [p for p in popular if p.downloads >= cfg.popularity_floor]
    if any(p.name == name for p in eligible):
        return ()
    threshold = cfg.threshold_for(name)
    hits = []
    for p in eligible:
        if own_authors & {a.lower() for a in p.authors}:
            continue
        d = edit_distance(name, p.name)
        if d == 0:
            d = 1
        if d <= threshold:
            hits.append((p.name, d))
    return tuple(sorted(hits, key=lambda h: (h[1], h[0])))


def cross_registry_check(coord: PackageCoordinate, authors, other_indexes):
    """Exact-name matches in other registries.

    other_indexes: {Registry: {canonical name: set of authors}}. Each
    match is reported with an author_mismatch flag; only disjoint
    author sets indicate masking.
    """
    own_authors = {a.lower() for a in authors}
    hits = []
    for registry, index in sorted(other_indexes.items(), key=lambda kv: kv[0].value):
        if registry is coord.registry:
            continue
        foreign_name = canonical_name(registry, coord.name)
        if foreign_name in index:
            theirs = {a.lower() for a in index[foreign_name]}
            mismatch = not (own_authors & theirs)
            hits.append((registry.value, foreign_name, mismatch))
    return tuple(hits)


def correlate_known_malware(coord: PackageCoordinate, meta: PackageMetadata, malware_list, cfg: MetadataConfig):
    """Relations to the known-malware list.

    SHARED_AUTHOR: any author in common. DEPENDS_ON: a declared
    runtime dep names a malware coordinate in the same registry and
    the constraint admits its version. RELEASE_WINDOW: released within
    the configured window of a malware release.
    """
    own_authors = {a.lower() for a in meta.authors}
    dep_names = {
        canonical_name(coord.registry, d.name): d.constraint for d in meta.runtime_deps()
    }
    window_seconds = cfg.release_window_days * 86400
    relations = []
    for rec in malware_list:
        if rec.coordinate.key() == coord.key():
            continue
        key = rec.coordinate.key()
        if own_authors & {a.lower() for a in rec.authors}:
            relations.append((key, "SHARED_AUTHOR"))
        if rec.coordinate.registry is coord.registry and rec.coordinate.name in dep_names:
            constraint = dep_names[rec.coordinate.name]
            if satisfies(rec.coordinate.version, constraint) or constraint in ("", "*"):
                relations.append((key, "DEPENDS_ON"))
        delta = abs((meta.release_time - rec.release_time).total_seconds())
        if delta <= window_seconds:
            relations.append((key, "RELEASE_WINDOW"))
    return tuple(sorted(set(relations)))


def analyze_metadata(meta: PackageMetadata, popular, other_indexes, malware_list, cfg: MetadataConfig) -> MetadataFindings:
    binaries = tuple(
        f for f in meta.file_inventory if f.kind in (FileKind.PE_BINARY, FileKind.ELF_BINARY)
    )
    return MetadataFindings(
        coordinate=meta.coordinate,
        typosquat_of=find_typosquats(meta.coordinate, meta.authors, popular, cfg),
        cross_registry_hits=cross_registry_check(meta.coordinate, meta.authors, other_indexes),
        related_malware=correlate_known_malware(meta.coordinate, meta, malware_list, cfg),
        binary_flags=binaries,
    )
