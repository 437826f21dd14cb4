"""Convert a sysdig-style capture into the normalized trace format.

Expected input: one event per line,

    <ts> <proc> <event> <args...>

where event is one of connect, dns, open-read, open-write, execve.
This covers the fields the classifier needs; anything else in a
capture line is ignored, and unknown event names are skipped with a
note so a partial converter never blocks an analysis run.
"""

from __future__ import annotations

from pkgvet.dynamic.trace import TraceEvent

_EVENT_MAP = {
    "connect": "NET_CONNECT",
    "dns": "DNS_QUERY",
    "open-read": "FILE_READ",
    "open-write": "FILE_WRITE",
    "execve": "PROC_SPAWN",
}


def convert_sysdig_lines(lines, run: str, mode: str) -> tuple:
    """(events, notes). Lines that do not translate produce notes."""
    events = []
    notes = []
    for line_no, line in enumerate(lines, 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) < 4:
            notes.append(f"line {line_no}: too short, skipped")
            continue
        ts_raw, proc, name = parts[0], parts[1], parts[2]
        args = parts[3:]
        kind = _EVENT_MAP.get(name)
        if kind is None:
            notes.append(f"line {line_no}: unknown event {name!r}, skipped")
            continue
        try:
            ts = float(ts_raw)
        except ValueError:
            notes.append(f"line {line_no}: bad timestamp, skipped")
            continue
        if kind == "NET_CONNECT":
            ip, _, port = args[0].rpartition(":")
            detail = {"ip": ip or args[0], "port": int(port) if port.isdigit() else 0}
        elif kind == "DNS_QUERY":
            detail = {"domain": args[0]}
        elif kind in ("FILE_READ", "FILE_WRITE"):
            detail = {"path": args[0]}
        else:
            detail = {"argv": args, "parent_chain": [proc]}
        events.append(TraceEvent(run=run, mode=mode, ts=ts, kind=kind, detail=detail))
    events.sort(key=lambda e: e.ts)
    return tuple(events), tuple(notes)
