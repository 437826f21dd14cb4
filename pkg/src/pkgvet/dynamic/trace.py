"""Normalized runtime traces.

One event per line as JSON:

    {"run": "npm:left-pad:1.3.0", "mode": "INSTALL", "ts": 3.25,
     "kind": "FILE_READ", "detail": {"path": "/etc/hostname"}}

Kinds and their required detail fields:

    NET_CONNECT  ip, port
    DNS_QUERY    domain
    FILE_READ    path
    FILE_WRITE   path
    PROC_SPAWN   argv (list), parent_chain (list)

Anything malformed raises TraceMalformedError carrying the 1-based
line number; blank lines are skipped. Events come back ordered by
timestamp, ties keeping file order, so repeated parses of one file
always agree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from pkgvet.dynamic.runplan import RunMode
from pkgvet.errors import TraceMalformedError

_REQUIRED_DETAIL = {
    "NET_CONNECT": ("ip", "port"),
    "DNS_QUERY": ("domain",),
    "FILE_READ": ("path",),
    "FILE_WRITE": ("path",),
    "PROC_SPAWN": ("argv", "parent_chain"),
}

EVENT_KINDS = tuple(sorted(_REQUIRED_DETAIL))


@dataclass(frozen=True)
class TraceEvent:
    run: str
    mode: str
    ts: float
    kind: str
    detail: dict

    def to_dict(self) -> dict:
        return {"run": self.run, "mode": self.mode, "ts": self.ts, "kind": self.kind, "detail": dict(self.detail)}


def _parse_line(doc, line_no: int) -> TraceEvent:
    if not isinstance(doc, dict):
        raise TraceMalformedError("event is not an object", line_no)
    for key in ("run", "mode", "ts", "kind", "detail"):
        if key not in doc:
            raise TraceMalformedError(f"missing field {key!r}", line_no)
    mode = doc["mode"]
    if mode not in RunMode.ORDER:
        raise TraceMalformedError(f"unknown mode {mode!r}", line_no)
    kind = doc["kind"]
    if kind not in _REQUIRED_DETAIL:
        raise TraceMalformedError(f"unknown kind {kind!r}", line_no)
    ts = doc["ts"]
    if not isinstance(ts, (int, float)) or isinstance(ts, bool) or ts < 0:
        raise TraceMalformedError(f"bad timestamp {ts!r}", line_no)
    detail = doc["detail"]
    if not isinstance(detail, dict):
        raise TraceMalformedError("detail is not an object", line_no)
    for field in _REQUIRED_DETAIL[kind]:
        if field not in detail:
            raise TraceMalformedError(f"{kind} event missing detail.{field}", line_no)
    if kind == "PROC_SPAWN":
        for field in ("argv", "parent_chain"):
            value = detail[field]
            if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
                raise TraceMalformedError(f"PROC_SPAWN detail.{field} must be a list of strings", line_no)
        if not detail["argv"]:
            raise TraceMalformedError("PROC_SPAWN argv is empty", line_no)
    return TraceEvent(run=str(doc["run"]), mode=mode, ts=float(ts), kind=kind, detail=detail)


def parse_trace_lines(lines) -> list:
    events = []
    for line_no, line in enumerate(lines, 1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            doc = json.loads(stripped)
        except ValueError as exc:
            raise TraceMalformedError(f"not valid JSON: {exc}", line_no) from exc
        events.append(_parse_line(doc, line_no))
    events.sort(key=lambda e: e.ts)  # sort is stable: equal stamps keep file order
    return events


def parse_trace(path) -> list:
    text = Path(path).read_text(encoding="utf-8")
    return parse_trace_lines(text.splitlines())


def write_trace(path, events) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for event in events:
            fh.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")
