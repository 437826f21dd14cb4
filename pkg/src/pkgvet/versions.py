"""Loose version ordering and constraint matching.

Registries disagree on version grammar, so comparison is deliberately
permissive: dotted numeric segments compare numerically, a textual
pre-release tail sorts before the bare release it suffixes, and wholly
non-numeric versions fall back to string order. Constraint matching
covers the operators that actually occur in manifests (exact, ``*``,
``^``, ``~``, and the comparison operators); anything unrecognized
matches nothing and the resolver reports it instead of guessing.
"""

from __future__ import annotations

import re

from pkgvet.errors import VersionOrderError

_SEGMENT = re.compile(r"^(\d+)(.*)$")


def _split(version: str) -> list[tuple[int, str]]:
    parts = []
    for raw in version.strip().split("."):
        m = _SEGMENT.match(raw)
        if m:
            parts.append((int(m.group(1)), m.group(2)))
        else:
            # wholly textual segment, e.g. "beta"; numeric rank -1 so it
            # sorts before any numbered segment at the same position
            parts.append((-1, raw))
    return parts


def compare(a: str, b: str) -> int:
    """Return -1, 0, or 1 ordering version strings a and b."""
    if not a.strip() or not b.strip():
        raise VersionOrderError(f"cannot order empty version ({a!r} vs {b!r})")
    pa, pb = _split(a), _split(b)
    for i in range(max(len(pa), len(pb))):
        # missing segment ranks as plain zero: 1.2 == 1.2.0, 1.2 < 1.2.1
        na, ta = pa[i] if i < len(pa) else (0, "")
        nb, tb = pb[i] if i < len(pb) else (0, "")
        if na != nb:
            return -1 if na < nb else 1
        if ta != tb:
            # "1.0" beats "1.0rc1": an empty tail is the released form
            if ta == "":
                return 1
            if tb == "":
                return -1
            return -1 if ta < tb else 1
    return 0


def sort_versions(versions: list[str]) -> list[str]:
    import functools

    return sorted(versions, key=functools.cmp_to_key(compare))


_CONSTRAINT = re.compile(r"^(\^|~|>=|<=|>|<|==|=)?\s*(.+)$")


def satisfies(version: str, constraint: str) -> bool:
    constraint = constraint.strip()
    if constraint in ("", "*", "latest"):
        return True
    m = _CONSTRAINT.match(constraint)
    if not m:
        return False
    op, base = m.group(1) or "==", m.group(2).strip()
    try:
        cmp = compare(version, base)
    except VersionOrderError:
        return False
    if op in ("==", "="):
        return cmp == 0
    if op == ">=":
        return cmp >= 0
    if op == "<=":
        return cmp <= 0
    if op == ">":
        return cmp > 0
    if op == "<":
        return cmp < 0
    base_parts = _split(base)
    ver_parts = _split(version)
    if cmp < 0:
        return False
    if op == "^":
        # stay within the leftmost non-zero segment, npm-style
        for i, (num, _) in enumerate(base_parts):
            if num > 0 or i == len(base_parts) - 1:
                vi = ver_parts[i] if i < len(ver_parts) else (0, "")
                return vi[0] == num and vi[1] == base_parts[i][1]
        return False
    if op == "~":
        # same major.minor
        for i in range(min(2, len(base_parts))):
            vi = ver_parts[i] if i < len(ver_parts) else (0, "")
            if vi[0] != base_parts[i][0]:
                return False
        return True
    return False


def pick_latest(versions: list[str], constraint: str) -> str | None:
    """Newest version satisfying the constraint, or None."""
    matching = [v for v in versions if satisfies(v, constraint)]
    if not matching:
        return None
    return sort_versions(matching)[-1]
