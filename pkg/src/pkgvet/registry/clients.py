"""Registry clients: live HTTP endpoints and the offline fixture layout.

Fixture layout (one directory per package version):

    <root>/<registry>/<name>/<version>/meta.json   required
    <root>/<registry>/<name>/<version>/package/    extracted source tree, optional
    <root>/traces/<registry>__<name>__<version>.ndjson  normalized trace, optional
    <root>/popular/<registry>.json                 ranked popular list
    <root>/known_malware.ndjson                    known-malware records

meta.json follows the PackageMetadata schema (see model.py); the file
inventory is recomputed from package/ when the document omits it, so
fixtures only need to spell out inventories for files they do not ship.

Live parsing is separated from transport so response decoding is
testable offline.
"""

from __future__ import annotations

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from pkgvet.errors import NotFoundError, SchemaError
from pkgvet.model import (
    Dependency,
    DepKind,
    PackageCoordinate,
    PackageMetadata,
    Registry,
    SubjectLanguage,
    canonical_name,
    metadata_from_dict,
    parse_timestamp,
)
from pkgvet.registry.files import classify_files


@dataclass(frozen=True)
class PopularPackage:
    name: str
    downloads: int
    authors: tuple


@dataclass(frozen=True)
class MalwareRecord:
    coordinate: PackageCoordinate
    authors: tuple
    release_time: object  # datetime


class FixtureClient:
    """Reads the on-disk fixture layout above. No network."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        if not self.root.is_dir():
            raise NotFoundError(f"fixture root {root} is not a directory")

    def fetch_metadata(self, coord: PackageCoordinate) -> PackageMetadata:
        pkg_dir = self.root / coord.registry.value / coord.name / coord.version
        meta_path = pkg_dir / "meta.json"
        if not meta_path.is_file():
            raise NotFoundError(f"{coord.key()}: no fixture at {meta_path}")
        try:
            doc = json.loads(meta_path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaError(f"{coord.key()}: unreadable meta.json: {exc}") from exc
        doc.setdefault("registry", coord.registry.value)
        doc.setdefault("name", coord.name)
        doc.setdefault("version", coord.version)
        meta = metadata_from_dict(doc)
        notes = list(meta.notes)
        if "downloads" not in doc:
            notes.append("downloads missing from fixture; defaulted to 0")
        source_root = pkg_dir / "package"
        files = meta.file_inventory
        if not files and source_root.is_dir():
            files = tuple(classify_files(source_root))
        trace = self.root / "traces" / f"{coord.registry.value}__{coord.name}__{coord.version}.ndjson"
        return PackageMetadata(
            coordinate=meta.coordinate,
            authors=meta.authors,
            release_time=meta.release_time,
            downloads=meta.downloads,
            declared_deps=meta.declared_deps,
            subject_language=meta.subject_language,
            file_inventory=files,
            notes=tuple(notes),
            source_root=str(source_root) if source_root.is_dir() else None,
            trace_path=str(trace) if trace.is_file() else None,
        )

    def list_coordinates(self) -> list:
        coords = []
        for meta_path in sorted(self.root.glob("*/*/*/meta.json")):
            version_dir = meta_path.parent
            name_dir = version_dir.parent
            registry_dir = name_dir.parent
            try:
                registry = Registry(registry_dir.name)
            except ValueError:
                continue
            coords.append(PackageCoordinate(registry, name_dir.name, version_dir.name))
        return coords

    def fetch_popular(self, registry: Registry) -> list:
        path = self.root / "popular" / f"{registry.value}.json"
        if not path.is_file():
            return []
        try:
            rows = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaError(f"popular list {path}: {exc}") from exc
        popular = [
            PopularPackage(
                name=canonical_name(registry, row["name"]),
                downloads=int(row["downloads"]),
                authors=tuple(row.get("authors", [])),
            )
            for row in rows
        ]
        return sorted(popular, key=lambda p: -p.downloads)

    def load_known_malware(self) -> list:
        path = self.root / "known_malware.ndjson"
        records = []
        if not path.is_file():
            return records
        for i, line in enumerate(path.read_text().splitlines(), 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                records.append(
                    MalwareRecord(
                        coordinate=PackageCoordinate(
                            Registry(doc["registry"]), doc["name"], doc.get("version", "0")
                        ),
                        authors=tuple(doc.get("authors", [])),
                        release_time=parse_timestamp(doc["release_time"]),
                    )
                )
            except (KeyError, ValueError, json.JSONDecodeError) as exc:
                raise SchemaError(f"known_malware.ndjson line {i}: {exc}") from exc
        return records


# --- live response decoding, kept transport-free for testability ---


def parse_pypi_response(doc: dict, coord: PackageCoordinate) -> PackageMetadata:
    info = doc.get("info") or {}
    authors = tuple(a for a in [info.get("author"), info.get("maintainer")] if a)
    urls = doc.get("urls") or []
    release_time = urls[0]["upload_time_iso_8601"] if urls else info.get("upload_time")
    if release_time is None:
        raise SchemaError(f"{coord.key()}: no release time in response")
    deps = []
    for req in info.get("requires_dist") or []:
        # "name (>=1.0); extra == 'test'": extras count as dev here
        name = req.split(";")[0].split("(")[0].split(">=")[0].split("==")[0].strip()
        constraint = "*"
        if "(" in req:
            constraint = req.split("(", 1)[1].split(")", 1)[0].strip()
        kind = DepKind.DEV if "extra ==" in req else DepKind.RUNTIME
        if name:
            deps.append(Dependency(name, constraint, kind))
    notes = []
    downloads = int((info.get("downloads") or {}).get("last_month") or 0)
    if downloads <= 0:
        downloads = 0
        notes.append("downloads missing from registry response; defaulted to 0")
    return PackageMetadata(
        coordinate=coord,
        authors=authors,
        release_time=parse_timestamp(release_time),
        downloads=downloads,
        declared_deps=tuple(deps),
        subject_language=SubjectLanguage.PY,
        notes=tuple(notes),
    )


def parse_npm_response(doc: dict, coord: PackageCoordinate) -> PackageMetadata:
    versions = doc.get("versions") or {}
    vdoc = versions.get(coord.version)
    if vdoc is None:
        raise NotFoundError(f"{coord.key()}: version absent from registry document")
    time_map = doc.get("time") or {}
    release_time = time_map.get(coord.version)
    if release_time is None:
        raise SchemaError(f"{coord.key()}: no release time in response")
    authors = []
    for field in ("author", "_npmUser"):
        v = vdoc.get(field) or doc.get(field)
        if isinstance(v, dict) and v.get("name"):
            authors.append(v["name"])
        elif isinstance(v, str):
            authors.append(v)
    deps = [
        Dependency(name, constraint, DepKind.RUNTIME)
        for name, constraint in sorted((vdoc.get("dependencies") or {}).items())
    ] + [
        Dependency(name, constraint, DepKind.DEV)
        for name, constraint in sorted((vdoc.get("devDependencies") or {}).items())
    ]
    return PackageMetadata(
        coordinate=coord,
        authors=tuple(dict.fromkeys(authors)),
        release_time=parse_timestamp(release_time),
        downloads=0,
        declared_deps=tuple(deps),
        subject_language=SubjectLanguage.JS,
        notes=("downloads not served by this endpoint; defaulted to 0",),
    )


def parse_rubygems_response(doc: dict, coord: PackageCoordinate) -> PackageMetadata:
    release_time = doc.get("created_at")
    if release_time is None:
        raise SchemaError(f"{coord.key()}: no release time in response")
    deps = []
    for kind_name, kind in (("runtime", DepKind.RUNTIME), ("development", DepKind.DEV)):
        for d in (doc.get("dependencies") or {}).get(kind_name, []):
            deps.append(Dependency(d["name"], d.get("requirements", "*"), kind))
    return PackageMetadata(
        coordinate=coord,
        authors=tuple(a.strip() for a in (doc.get("authors") or "").split(",") if a.strip()),
        release_time=parse_timestamp(release_time),
        downloads=int(doc.get("version_downloads") or doc.get("downloads") or 0),
        declared_deps=tuple(deps),
        subject_language=SubjectLanguage.RB,
        notes=(),
    )


_LIVE_ENDPOINTS = {
    Registry.PYPI: "https://pypi.org/pypi/{name}/{version}/json",
    Registry.NPM: "https://registry.npmjs.org/{name}",
    Registry.RUBYGEMS: "https://rubygems.org/api/v2/rubygems/{name}/versions/{version}.json",
}

_LIVE_PARSERS = {
    Registry.PYPI: parse_pypi_response,
    Registry.NPM: parse_npm_response,
    Registry.RUBYGEMS: parse_rubygems_response,
}


class LiveClient:
    """Speaks the public JSON endpoints. Not used by any shipped test."""

    def __init__(self, timeout: float = 30.0):
        import requests

        self._session = requests.Session()
        self._timeout = timeout

    def fetch_metadata(self, coord: PackageCoordinate) -> PackageMetadata:
        url = _LIVE_ENDPOINTS[coord.registry].format(name=coord.name, version=coord.version)
        resp = self._session.get(url, timeout=self._timeout)
        if resp.status_code == 404:
            raise NotFoundError(f"{coord.key()}: registry returned 404")
        if resp.status_code != 200:
            raise SchemaError(f"{coord.key()}: registry returned {resp.status_code}")
        try:
            doc = resp.json()
        except ValueError as exc:
            raise SchemaError(f"{coord.key()}: response not JSON: {exc}") from exc
        return _LIVE_PARSERS[coord.registry](doc, coord)


class _RateLimiter:
    """Simple per-registry minimum-interval limiter, thread-safe."""

    def __init__(self, per_second: float):
        self._interval = 1.0 / per_second if per_second > 0 else 0.0
        self._next_ok = 0.0
        self._lock = threading.Lock()

    def wait(self):
        if self._interval == 0.0:
            return
        with self._lock:
            now = time.monotonic()
            delay = self._next_ok - now
            self._next_ok = max(now, self._next_ok) + self._interval
        if delay > 0:
            time.sleep(delay)


def fetch_many(coords, client, concurrency: int = 4, rate_per_second: float = 0.0):
    """Fetch metadata for many coordinates concurrently.

    Returns (metas, errors) where errors maps coordinate key to the
    error string; one bad package never aborts the batch.
    """
    limiters = {r: _RateLimiter(rate_per_second) for r in Registry}
    metas = []
    errors = {}

    def one(coord):
        limiters[coord.registry].wait()
        return client.fetch_metadata(coord)

    with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        futures = {pool.submit(one, c): c for c in coords}
        for future, coord in futures.items():
            try:
                metas.append(future.result())
            except Exception as exc:  # noqa: BLE001 - collected per package
                errors[coord.key()] = str(exc)
    metas.sort(key=lambda m: m.coordinate.sort_key())
    return metas, errors
