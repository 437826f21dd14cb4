"""File inventory: classify package contents by magic bytes.

Classification looks only at content, never at the file name, so a
renamed binary keeps its kind. Extraction of .tar.gz/.zip archives is
supported, but fixture corpora usually ship pre-extracted trees.
"""

from __future__ import annotations

import tarfile
import tempfile
import zipfile
from pathlib import Path

from pkgvet.errors import ArchiveCorruptError
from pkgvet.model import FileEntry, FileKind

# Mach-O (4 variants + fat) and WASM: native code that is neither ELF nor PE
_NATIVE_MAGICS = ("FEEDFACE", "FEEDFACF", "CEFAEDFE", "CFFAEDFE", "CAFEBABE", "0061736D")

_TEXT_PROBE_BYTES = 65536


def classify_bytes(head: bytes, probe: bytes) -> FileKind:
    magic = head.hex().upper()
    if magic.startswith("7F454C46"):
        return FileKind.ELF_BINARY
    if magic.startswith("4D5A"):
        return FileKind.PE_BINARY
    if any(magic.startswith(m) for m in _NATIVE_MAGICS):
        return FileKind.NATIVE_EXT
    if b"\x00" in probe:
        return FileKind.OTHER
    try:
        probe.decode("utf-8")
    except UnicodeDecodeError:
        return FileKind.OTHER
    return FileKind.SOURCE


def classify_file(path: Path, rel: str) -> FileEntry:
    try:
        with open(path, "rb") as fh:
            probe = fh.read(_TEXT_PROBE_BYTES)
        size = path.stat().st_size
    except OSError as exc:
        raise ArchiveCorruptError(f"cannot read {rel}: {exc}") from exc
    head = probe[:8]
    return FileEntry(
        path=rel,
        byte_size=size,
        kind=classify_bytes(head, probe),
        magic_prefix=head.hex().upper(),
    )


def classify_files(archive: str | Path) -> list[FileEntry]:
    """Inventory every regular file in a package tree or archive.

    Accepts a directory (already-extracted package) or a .tar.gz /
    .zip archive. Entries come back sorted by path so inventories are
    reproducible.
    """
    root = Path(archive)
    if root.is_dir():
        return _classify_tree(root)
    if not root.exists():
        raise ArchiveCorruptError(f"{archive}: no such file or directory")
    with tempfile.TemporaryDirectory(prefix="pkgvet-extract-") as tmp:
        _extract(root, Path(tmp))
        return _classify_tree(Path(tmp))


def _classify_tree(root: Path) -> list[FileEntry]:
    entries = []
    for path in sorted(root.rglob("*")):
        if not path.is_file() or path.is_symlink():
            continue
        rel = path.relative_to(root).as_posix()
        entries.append(classify_file(path, rel))
    return entries


def _extract(archive: Path, dest: Path) -> None:
    name = archive.name.lower()
    try:
        if name.endswith(".zip"):
            with zipfile.ZipFile(archive) as zf:
                for info in zf.infolist():
                    target = dest / info.filename
                    if not target.resolve().is_relative_to(dest.resolve()):
                        raise ArchiveCorruptError(f"{archive}: path escape {info.filename!r}")
                zf.extractall(dest)
            return
        with tarfile.open(archive) as tf:
            for member in tf.getmembers():
                target = dest / member.name
                if not target.resolve().is_relative_to(dest.resolve()):
                    raise ArchiveCorruptError(f"{archive}: path escape {member.name!r}")
            tf.extractall(dest)
    except (tarfile.TarError, zipfile.BadZipFile, OSError) as exc:
        raise ArchiveCorruptError(f"{archive}: {exc}") from exc
