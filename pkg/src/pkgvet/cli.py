"""Command-line front end.

    pkgvet ingest   --from-fixtures DIR [--registry R] [--out DIR]
    pkgvet graph    --in DIR [--out FILE]
    pkgvet analyze  --corpus DIR --workspace DIR [--analyzers m,s,d]
                    [--jobs N] [--cache DIR] [--rules F] [--labels F]
    pkgvet flag     --workspace DIR [--rules F] [--exclusions F]
    pkgvet report   --workspace DIR [--format json|table] [--top K]
    pkgvet serve    --workspace DIR [--addr HOST:PORT]
    pkgvet runplan  --corpus DIR --coord registry:name:version

Exit codes: 0 ok, 1 usage, 2 bad config or input, 3 run finished with
per-package failures. The cache root comes from --cache or the
PKGVET_CACHE environment variable.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pkgvet.errors import PkgvetError
from pkgvet.model import PackageCoordinate, Registry, metadata_to_dict

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_PARTIAL = 3

_ANALYZER_NAMES = {"m": "metadata", "s": "static", "d": "dynamic"}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the documented contract is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pkgvet", description="Registry package vetting pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize package metadata into one JSON per version")
    p.add_argument("--from-fixtures", metavar="DIR", help="fixture corpus directory")
    p.add_argument("--live", action="store_true", help="fetch from the public registry APIs")
    p.add_argument("--registry", choices=[r.value for r in Registry], help="restrict to one registry")
    p.add_argument("--out", metavar="DIR", help="write normalized documents here")
    p.add_argument("coords", nargs="*", metavar="COORD", help="registry:name:version (live mode)")

    p = sub.add_parser("graph", help="resolve runtime dependencies and print the graph")
    p.add_argument("--in", dest="corpus", required=True, metavar="DIR")
    p.add_argument("--out", metavar="FILE", help="write graph JSON here instead of stdout")

    p = sub.add_parser("analyze", help="run analyzers over a corpus and persist the evaluation")
    p.add_argument("--corpus", required=True, metavar="DIR")
    p.add_argument("--workspace", required=True, metavar="DIR")
    p.add_argument("--analyzers", default="m,s,d", metavar="m,s,d",
                   help="comma list: m=metadata s=static d=dynamic")
    p.add_argument("--jobs", type=int, default=1, metavar="N")
    p.add_argument("--cache", metavar="DIR", help="cache root (default: PKGVET_CACHE or ~/.cache/pkgvet)")
    p.add_argument("--rules", metavar="FILE")
    p.add_argument("--labels", metavar="FILE")

    p = sub.add_parser("flag", help="re-evaluate rules over the saved analysis")
    p.add_argument("--workspace", required=True, metavar="DIR")
    p.add_argument("--rules", metavar="FILE")
    p.add_argument("--exclusions", metavar="FILE", help="exclusion log (default: workspace copy)")

    p = sub.add_parser("report", help="print the suspicion queue")
    p.add_argument("--workspace", required=True, metavar="DIR")
    p.add_argument("--format", choices=("json", "table"), default="table")
    p.add_argument("--top", type=int, default=None, metavar="K")

    p = sub.add_parser("serve", help="serve the triage HTTP API")
    p.add_argument("--workspace", required=True, metavar="DIR")
    p.add_argument("--addr", default="127.0.0.1:8400", metavar="HOST:PORT")

    p = sub.add_parser("runplan", help="print the execution plan for one package")
    p.add_argument("--corpus", required=True, metavar="DIR")
    p.add_argument("--coord", required=True, metavar="registry:name:version")

    return parser


def _parse_coord(text: str) -> PackageCoordinate:
    parts = text.split(":")
    if len(parts) != 3 or not all(parts):
        raise PkgvetError(f"coordinate {text!r} is not registry:name:version")
    try:
        registry = Registry(parts[0])
    except ValueError as exc:
        raise PkgvetError(f"unknown registry {parts[0]!r}") from exc
    return PackageCoordinate(registry, parts[1], parts[2])


def _parse_analyzers(text: str):
    chosen = []
    for token in text.split(","):
        token = token.strip().lower()
        if not token:
            continue
        name = _ANALYZER_NAMES.get(token, token)
        if name not in _ANALYZER_NAMES.values():
            raise PkgvetError(f"unknown analyzer {token!r} (use m,s,d)")
        if name not in chosen:
            chosen.append(name)
    if not chosen:
        raise PkgvetError("no analyzers selected")
    return tuple(chosen)


def cmd_ingest(args) -> int:
    from pkgvet.registry.clients import FixtureClient, LiveClient

    if bool(args.from_fixtures) == bool(args.live):
        raise PkgvetError("pick exactly one of --from-fixtures DIR or --live")
    docs = []
    if args.from_fixtures:
        client = FixtureClient(args.from_fixtures)
        coords = client.list_coordinates()
        if args.registry:
            coords = [c for c in coords if c.registry.value == args.registry]
        for coord in coords:
            docs.append(metadata_to_dict(client.fetch_metadata(coord)))
    else:
        if not args.coords:
            raise PkgvetError("--live needs explicit registry:name:version arguments")
        client = LiveClient()
        for text in args.coords:
            coord = _parse_coord(text)
            if args.registry and coord.registry.value != args.registry:
                continue
            docs.append(metadata_to_dict(client.fetch_metadata(coord)))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for doc in docs:
            name = f"{doc['registry']}__{doc['name']}__{doc['version']}.json"
            (out / name).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        print(f"wrote {len(docs)} package documents to {out}")
    else:
        print(json.dumps(docs, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_graph(args) -> int:
    from pkgvet.registry.clients import FixtureClient
    from pkgvet.registry.graph import build_graph, graph_to_json

    client = FixtureClient(args.corpus)
    metas = [client.fetch_metadata(c) for c in client.list_coordinates()]
    graph = build_graph(metas)
    text = graph_to_json(graph)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote graph ({len(graph.nodes)} nodes) to {args.out}")
    else:
        print(text)
    return EXIT_OK


def cmd_analyze(args) -> int:
    from pkgvet.pipeline import EXCLUSIONS_FILE, run_pipeline, save_state

    analyzers = _parse_analyzers(args.analyzers)
    ws = Path(args.workspace)
    result = run_pipeline(
        args.corpus,
        cache_root=args.cache,
        jobs=args.jobs,
        labels_path=args.labels,
        rules_path=args.rules,
        exclusions_path=ws / EXCLUSIONS_FILE if (ws / EXCLUSIONS_FILE).is_file() else None,
        workspace=ws,
        analyzers=analyzers,
    )
    save_state(result, ws)
    ran = " ".join(f"{k}={v}" for k, v in sorted(result.counters.items()))
    print(f"analyzed {len(result.metas)} packages ({ran} analyzer runs)")
    flagged = result.engine.queue()
    print(f"flagged {len(flagged)}; queue saved to {ws / 'queue.json'}")
    if result.errors:
        for coord, stage, message in result.errors:
            print(f"partial failure [{stage}] {coord}: {message}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_flag(args) -> int:
    from pkgvet.pipeline import QUEUE_FILE, load_state
    from pkgvet.rules.engine import ExclusionLog, TriageEngine

    result = load_state(args.workspace, rules_path=args.rules)
    engine = result.engine
    if args.exclusions:
        engine = TriageEngine(engine.ruleset, ExclusionLog(args.exclusions))
        for key, context in result.contexts.items():
            meta = result.engine.meta[key]
            engine.load_context(key, context, **meta)
        engine.verdicts.update(result.engine.verdicts)
        engine.evaluate_all()
    queue = engine.queue()
    (Path(args.workspace) / QUEUE_FILE).write_text(engine.export_queue())
    print(f"{len(queue)} flagged; queue saved to {Path(args.workspace) / QUEUE_FILE}")
    return EXIT_OK


def _table(rows) -> str:
    headers = ("coordinate", "score", "status", "rules", "amplified", "released")
    cells = [headers]
    for r in rows:
        cells.append((
            r.coordinate,
            f"{r.score:g}",
            r.status,
            ",".join(r.rule_ids()),
            str(r.amplified_downloads),
            r.release_time,
        ))
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = []
    for i, row in enumerate(cells):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * widths[j] for j in range(len(headers))))
    return "\n".join(lines)


def cmd_report(args) -> int:
    from pkgvet.pipeline import load_state

    result = load_state(args.workspace)
    rows = result.engine.queue(top=args.top)
    if args.format == "json":
        print(json.dumps({"queue": [r.to_dict() for r in rows]}, indent=2, sort_keys=True))
    else:
        if rows:
            print(_table(rows))
        else:
            print("queue empty")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from pkgvet.pipeline import load_state
    from pkgvet.service import create_app

    host, _, port_text = args.addr.rpartition(":")
    if not host or not port_text.isdigit():
        raise PkgvetError(f"--addr {args.addr!r} is not HOST:PORT")
    result = load_state(args.workspace)
    app = create_app(result, workspace=args.workspace)
    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    return EXIT_OK


def cmd_runplan(args) -> int:
    from pkgvet.dynamic.runplan import make_run_plan
    from pkgvet.registry.clients import FixtureClient
    from pkgvet.static.analyzer import analyze_package
    from pkgvet.static.labels import load_default_labels

    client = FixtureClient(args.corpus)
    coord = _parse_coord(args.coord)
    meta = client.fetch_metadata(coord)
    export_names = ()
    try:
        report = analyze_package(meta, load_default_labels()[meta.subject_language], {})
        export_names = tuple(sorted(report.exports))
    except PkgvetError:
        pass  # plan still valid without functional call targets
    plan = make_run_plan(meta, export_names=export_names)
    print(json.dumps(plan.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


_COMMANDS = {
    "ingest": cmd_ingest,
    "graph": cmd_graph,
    "analyze": cmd_analyze,
    "flag": cmd_flag,
    "report": cmd_report,
    "serve": cmd_serve,
    "runplan": cmd_runplan,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except PkgvetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
