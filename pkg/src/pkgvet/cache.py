"""Content-addressed store for analysis reports.

A report is keyed by what went into producing it: the package
coordinate, the analyzer family, the analyzer's version, and a digest
of the configuration that analyzer consumed. Rules and exclusions are
deliberately not inputs, so editing them never invalidates anything;
re-evaluating flags against cached reports is free. Corrupt entries
read as misses and are noted, never raised: a damaged cache must cost
a re-run, not an analysis.
"""

from __future__ import annotations

import gzip
import hashlib
import io
import json
import os
import tarfile
import tempfile
from dataclasses import dataclass
from pathlib import Path

from pkgvet.errors import CacheIOError

ENV_CACHE_ROOT = "PKGVET_CACHE"


def canonical_digest(obj) -> str:
    """sha256 over canonical JSON; key order never changes the digest."""
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CacheKey:
    coordinate: str  # "registry:name:version"
    analyzer: str  # metadata | static | dynamic
    analyzer_version: str
    config_digest: str

    def digest(self) -> str:
        return canonical_digest({
            "coordinate": self.coordinate,
            "analyzer": self.analyzer,
            "analyzer_version": self.analyzer_version,
            "config_digest": self.config_digest,
        })

    def to_dict(self) -> dict:
        return {
            "coordinate": self.coordinate,
            "analyzer": self.analyzer,
            "analyzer_version": self.analyzer_version,
            "config_digest": self.config_digest,
        }


def default_cache_root() -> Path:
    env = os.environ.get(ENV_CACHE_ROOT)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "pkgvet"


class ReportCache:
    def __init__(self, root=None):
        self.root = Path(root) if root is not None else default_cache_root()
        self.notes = []
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise CacheIOError(f"cannot create cache root {self.root}: {exc}") from exc

    def _path(self, key: CacheKey) -> Path:
        digest = key.digest()
        return self.root / digest[:2] / f"{digest}.json"

    def get(self, key: CacheKey):
        """The stored report, or None on miss. Corrupt files are misses."""
        path = self._path(key)
        if not path.is_file():
            return None
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            self.notes.append(f"cache entry {path.name} corrupt ({exc}); treating as miss")
            return None
        if doc.get("key") != key.to_dict():
            self.notes.append(f"cache entry {path.name} key mismatch; treating as miss")
            return None
        return doc.get("report")

    def put(self, key: CacheKey, report: dict) -> None:
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = json.dumps({"key": key.to_dict(), "report": report}, sort_keys=True, indent=1)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp, path)  # atomic: readers only ever see whole files
        except OSError as exc:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise CacheIOError(f"cannot write cache entry: {exc}") from exc

    def entries(self):
        """CacheKey for everything currently stored, with its path."""
        out = []
        for path in sorted(self.root.glob("*/*.json")):
            try:
                doc = json.loads(path.read_text(encoding="utf-8"))
                out.append((CacheKey(**doc["key"]), path))
            except (OSError, ValueError, KeyError, TypeError):
                self.notes.append(f"cache entry {path.name} corrupt during scan")
        return out

    def invalidate(self, predicate) -> int:
        """Drop entries whose CacheKey the predicate accepts; count dropped."""
        dropped = 0
        for key, path in self.entries():
            if predicate(key):
                try:
                    path.unlink()
                    dropped += 1
                except OSError as exc:
                    raise CacheIOError(f"cannot remove {path}: {exc}") from exc
        return dropped

    def export_archive(self, archive_path) -> int:
        """Pack the store into a tar.gz; returns the entry count.
        Deterministic: stable member order and zeroed metadata, so equal
        stores produce byte-identical archives."""
        paths = sorted(p for p in self.root.glob("*/*.json"))
        archive_path = Path(archive_path)
        with open(archive_path, "wb") as raw:
            # filename="" keeps the gzip FNAME header empty; a stored
            # output name would make equal stores compare unequal
            with gzip.GzipFile(filename="", fileobj=raw, mode="wb", mtime=0) as gz:
                with tarfile.open(fileobj=gz, mode="w") as tar:
                    for path in paths:
                        info = tarfile.TarInfo(name=str(path.relative_to(self.root)))
                        data = path.read_bytes()
                        info.size = len(data)
                        info.mtime = 0
                        info.uid = info.gid = 0
                        info.uname = info.gname = ""
                        tar.addfile(info, io.BytesIO(data))
        return len(paths)

    def import_archive(self, archive_path) -> int:
        """Unpack entries exported earlier; returns how many were added."""
        added = 0
        try:
            with tarfile.open(archive_path, "r:gz") as tar:
                for member in tar.getmembers():
                    if not member.isfile() or ".." in member.name or member.name.startswith("/"):
                        raise CacheIOError(f"archive member {member.name!r} refused")
                    target = self.root / member.name
                    target.parent.mkdir(parents=True, exist_ok=True)
                    src = tar.extractfile(member)
                    target.write_bytes(src.read())
                    added += 1
        except (OSError, tarfile.TarError) as exc:
            raise CacheIOError(f"cannot import archive: {exc}") from exc
        return added
