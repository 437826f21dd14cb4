"""HTTP view over an evaluated pipeline run.

The queue served here is exactly the queue the report command prints
for the same workspace: the service only reads engine state, and label
posts go through the same apply_label path the CLI uses. Labels are
persisted to the workspace (exclusion log, verdicts) as they arrive.

No auth; meant to be bound to loopback for a single analyst. CORS is
open so the bundled UI can be served from a file:// page or another
local port.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from pkgvet.errors import ConfigInvalidError, UnknownReportError
from pkgvet.rules.engine import (
    STATUS_CLEAN,
    STATUS_CONFIRMED_BENIGN,
    STATUS_CONFIRMED_MALICIOUS,
    STATUS_EXCLUDED,
    STATUS_FLAGGED,
)

_VALID_STATUSES = frozenset(
    (
        STATUS_FLAGGED,
        STATUS_CLEAN,
        STATUS_EXCLUDED,
        STATUS_CONFIRMED_MALICIOUS,
        STATUS_CONFIRMED_BENIGN,
    )
)
_EXCERPT_CONTEXT = 2  # lines either side of a flow hop


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def _source_excerpt(source_root, file, line) -> list:
    """Numbered source lines around one flow hop, missing files tolerated."""
    if not source_root:
        return []
    path = Path(source_root) / file
    try:
        lines = path.read_text(encoding="utf-8", errors="replace").splitlines()
    except OSError:
        return []
    lo = max(1, line - _EXCERPT_CONTEXT)
    hi = min(len(lines), line + _EXCERPT_CONTEXT)
    return [
        {"line": n, "text": lines[n - 1], "hit": n == line}
        for n in range(lo, hi + 1)
    ]


def create_app(result, workspace=None) -> FastAPI:
    """Wrap a loaded PipelineResult in the triage API."""
    from pkgvet.pipeline import save_verdicts

    engine = result.engine
    lock = threading.Lock()  # label writes serialize; reads take snapshots
    app = FastAPI(title="pkgvet triage", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/queue")
    def get_queue(status: str = STATUS_FLAGGED, top: int | None = None):
        statuses = tuple(s for s in status.split(",") if s)
        for s in statuses:
            if s not in _VALID_STATUSES:
                return _error(422, f"unknown status {s!r}")
        with lock:
            rows = engine.queue(statuses=statuses or (STATUS_FLAGGED,), top=top)
            return {
                "revision": engine.revision,
                "queue": [r.to_dict() for r in rows],
            }

    @app.get("/package/{registry}/{name}/{version}")
    def get_package(registry: str, name: str, version: str):
        key = f"{registry}:{name}:{version}"
        with lock:
            report = engine.reports.get(key)
            if report is None:
                return _error(404, f"unknown coordinate {key}")
            meta = result.metas.get(key)
            static_doc = result.static_reports.get(key)
            flows = []
            if static_doc:
                source_root = meta.source_root if meta else None
                for flow in static_doc.get("flows", ()):
                    hops = [
                        {
                            **hop,
                            "excerpt": _source_excerpt(source_root, hop["file"], hop["line"]),
                        }
                        for hop in flow.get("path", ())
                    ]
                    flows.append({**flow, "path": hops})
            return {
                "revision": engine.revision,
                "report": report.to_dict(),
                "metadata_findings": result.metadata_reports.get(key),
                "static_findings": {**static_doc, "flows": flows} if static_doc else None,
                "dynamic_findings": result.dynamic_reports.get(key),
                "attributed": list(result.attributed.get(key, ())),
                "downloads": meta.downloads if meta else None,
                "authors": list(meta.authors) if meta else [],
            }

    @app.post("/label")
    async def post_label(request: Request):
        body = await request.json()
        coordinate = body.get("coordinate", "")
        verdict = body.get("verdict", "")
        scope = body.get("scope", "coordinate")
        rule_id = body.get("rule_id", "")
        note = body.get("note", "")
        revision = body.get("revision")
        with lock:
            if revision is not None and revision != engine.revision:
                return _error(
                    409,
                    f"stale revision {revision} (current {engine.revision}); refresh and retry",
                )
            try:
                report = engine.apply_label(
                    coordinate, verdict, scope=scope, rule_id=rule_id, note=note
                )
            except UnknownReportError as exc:
                return _error(404, str(exc))
            except ConfigInvalidError as exc:
                return _error(422, str(exc))
            if workspace:
                save_verdicts(engine, workspace)
            return {"revision": engine.revision, "report": report.to_dict()}

    @app.get("/rules/stats")
    def get_stats():
        with lock:
            return {
                "revision": engine.revision,
                "rules": {
                    rule.rule_id: {
                        **engine.rule_stats()[rule.rule_id],
                        "description": rule.description,
                        "gray": rule.gray,
                    }
                    for rule in engine.ruleset.rules
                },
            }

    return app
