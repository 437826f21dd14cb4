"""Classify trace events against network, file, and process policies.

Network: a destination is fine when its registered domain has an
allowlist suffix or its address sits inside an allowlisted network.
Files: glob lists of sensitive read and write locations, with <user>
standing for any home directory; a glob guards both the path itself
and everything under it. Processes: each registry's package manager
has a small set of programs it legitimately runs, plus compiler
toolchain programs during install only. Everything outside that is an
unexpected process.
"""

from __future__ import annotations

import ipaddress
import json
from dataclasses import dataclass, field
from fnmatch import fnmatch
from importlib import resources
from pathlib import Path

from pkgvet.dynamic.runplan import RunMode
from pkgvet.errors import ConfigInvalidError
from pkgvet.model import Registry

DYNAMIC_ANALYZER_VERSION = "1.0.0"


def _load_config(name: str, override=None) -> dict:
    if override is not None:
        return json.loads(Path(override).read_text(encoding="utf-8"))
    ref = resources.files("pkgvet.configs").joinpath(name)
    return json.loads(ref.read_text(encoding="utf-8"))


class NetworkPolicy:
    def __init__(self, domains, networks):
        self.domains = tuple(sorted(set(d.lower().lstrip(".") for d in domains)))
        try:
            self.networks = tuple(ipaddress.ip_network(n) for n in networks)
        except ValueError as exc:
            raise ConfigInvalidError(f"bad network in allowlist: {exc}") from exc

    @classmethod
    def load(cls, path=None) -> "NetworkPolicy":
        doc = _load_config("net_allowlist.json", path)
        return cls(doc.get("domains", ()), doc.get("networks", ()))

    def domain_allowed(self, domain: str) -> bool:
        d = domain.lower().rstrip(".")
        return any(d == entry or d.endswith("." + entry) for entry in self.domains)

    def ip_allowed(self, ip: str) -> bool:
        try:
            addr = ipaddress.ip_address(ip)
        except ValueError:
            return False
        return any(addr in net for net in self.networks)

    def config_doc(self) -> dict:
        return {"domains": list(self.domains), "networks": [str(n) for n in self.networks]}


_USER_EXPANSIONS = ("/home/*", "/root")


def _expand_globs(globs):
    out = []
    for g in globs:
        if "<user>" in g:
            for base in _USER_EXPANSIONS:
                out.append(g.replace("<user>", base))
        else:
            out.append(g)
    return tuple(sorted(set(out)))


class FilePolicy:
    def __init__(self, reads, writes):
        self.read_globs = _expand_globs(reads)
        self.write_globs = _expand_globs(writes)

    @classmethod
    def load(cls, path=None) -> "FilePolicy":
        doc = _load_config("sensitive_paths.json", path)
        return cls(doc.get("reads", ()), doc.get("writes", ()))

    @staticmethod
    def _hit(path: str, globs) -> bool:
        return any(fnmatch(path, g) or fnmatch(path, g + "/*") for g in globs)

    def sensitive_read(self, path: str) -> bool:
        return self._hit(path, self.read_globs)

    def sensitive_write(self, path: str) -> bool:
        return self._hit(path, self.write_globs)

    def config_doc(self) -> dict:
        return {"reads": list(self.read_globs), "writes": list(self.write_globs)}


class ProcessPolicy:
    def __init__(self, expected_roots, compile_allowlist):
        self.expected_roots = {k: frozenset(v) for k, v in expected_roots.items()}
        self.compile_allowlist = frozenset(compile_allowlist)

    @classmethod
    def load(cls, path=None) -> "ProcessPolicy":
        doc = _load_config("process_policy.json", path)
        return cls(doc.get("expected_roots", {}), doc.get("compile_allowlist", ()))

    def allowed(self, registry: Registry, mode: str, program: str) -> bool:
        base = program.rsplit("/", 1)[-1]
        if base in self.expected_roots.get(registry.value, frozenset()):
            return True
        # building native extensions is an install-time activity only
        return mode == RunMode.INSTALL and base in self.compile_allowlist

    def chain_expected(self, registry: Registry, mode: str, chain) -> bool:
        return all(self.allowed(registry, mode, p) for p in chain)

    def config_doc(self) -> dict:
        return {
            "expected_roots": {k: sorted(v) for k, v in sorted(self.expected_roots.items())},
            "compile_allowlist": sorted(self.compile_allowlist),
        }


@dataclass
class DynamicFindings:
    coordinate: str
    modes_seen: tuple = ()
    unexpected_endpoints: tuple = ()  # event dicts
    sensitive_reads: tuple = ()
    sensitive_writes: tuple = ()
    unexpected_processes: tuple = ()
    notes: tuple = ()

    def counts(self) -> dict:
        return {
            "unexpected_endpoint_count": len(self.unexpected_endpoints),
            "sensitive_read_count": len(self.sensitive_reads),
            "sensitive_write_count": len(self.sensitive_writes),
            "unexpected_process_count": len(self.unexpected_processes),
        }

    def to_dict(self) -> dict:
        return {
            "coordinate": self.coordinate,
            "modes_seen": list(self.modes_seen),
            "unexpected_endpoints": [dict(e) for e in self.unexpected_endpoints],
            "sensitive_reads": [dict(e) for e in self.sensitive_reads],
            "sensitive_writes": [dict(e) for e in self.sensitive_writes],
            "unexpected_processes": [dict(e) for e in self.unexpected_processes],
            "notes": list(self.notes),
        }


def dynamic_findings_from_dict(doc: dict) -> DynamicFindings:
    return DynamicFindings(
        coordinate=doc["coordinate"],
        modes_seen=tuple(doc.get("modes_seen", ())),
        unexpected_endpoints=tuple(doc.get("unexpected_endpoints", ())),
        sensitive_reads=tuple(doc.get("sensitive_reads", ())),
        sensitive_writes=tuple(doc.get("sensitive_writes", ())),
        unexpected_processes=tuple(doc.get("unexpected_processes", ())),
        notes=tuple(doc.get("notes", ())),
    )


@dataclass
class Policies:
    network: NetworkPolicy = field(default_factory=NetworkPolicy.load)
    files: FilePolicy = field(default_factory=FilePolicy.load)
    processes: ProcessPolicy = field(default_factory=ProcessPolicy.load)

    def config_doc(self) -> dict:
        return {
            "network": self.network.config_doc(),
            "files": self.files.config_doc(),
            "processes": self.processes.config_doc(),
        }


def _evidence(event) -> dict:
    doc = event.to_dict()
    return {"mode": doc["mode"], "ts": doc["ts"], "kind": doc["kind"], "detail": doc["detail"]}


def classify_trace(coordinate: str, events, registry: Registry, policies: Policies, notes=()) -> DynamicFindings:
    endpoints = []
    reads = []
    writes = []
    procs = []
    modes = []
    for event in events:
        if event.mode not in modes:
            modes.append(event.mode)
        if event.kind == "NET_CONNECT":
            if not policies.network.ip_allowed(event.detail["ip"]):
                endpoints.append(_evidence(event))
        elif event.kind == "DNS_QUERY":
            if not policies.network.domain_allowed(event.detail["domain"]):
                endpoints.append(_evidence(event))
        elif event.kind == "FILE_READ":
            if policies.files.sensitive_read(event.detail["path"]):
                reads.append(_evidence(event))
        elif event.kind == "FILE_WRITE":
            if policies.files.sensitive_write(event.detail["path"]):
                writes.append(_evidence(event))
        elif event.kind == "PROC_SPAWN":
            program = event.detail["argv"][0]
            if not policies.processes.allowed(registry, event.mode, program):
                procs.append(_evidence(event))
    return DynamicFindings(
        coordinate=coordinate,
        modes_seen=tuple(modes),
        unexpected_endpoints=tuple(endpoints),
        sensitive_reads=tuple(reads),
        sensitive_writes=tuple(writes),
        unexpected_processes=tuple(procs),
        notes=tuple(notes),
    )


def _evidence_key(ev: dict) -> tuple:
    return (ev["kind"], json.dumps(ev["detail"], sort_keys=True))


def attribute_findings(own: DynamicFindings, dep_findings) -> tuple:
    """Split install-time findings into (retained, attributed-to-deps).

    Installing a package also installs its dependency closure, so an
    install trace mixes their behavior. A finding whose kind and detail
    also appear in some dependency's own findings is attributed there
    instead of counting against this package. Non-install findings are
    never moved: import and functional steps run this package's code.
    Every original finding lands in exactly one of the two outputs.
    """
    dep_keys = {}
    for dep in dep_findings:
        for bucket in ("unexpected_endpoints", "sensitive_reads", "sensitive_writes", "unexpected_processes"):
            for ev in getattr(dep, bucket):
                dep_keys.setdefault(_evidence_key(ev), dep.coordinate)

    attributed = []
    kept = {}
    for bucket in ("unexpected_endpoints", "sensitive_reads", "sensitive_writes", "unexpected_processes"):
        retained = []
        for ev in getattr(own, bucket):
            key = _evidence_key(ev)
            if ev["mode"] == RunMode.INSTALL and key in dep_keys:
                attributed.append({"evidence": dict(ev), "attributed_to": dep_keys[key], "bucket": bucket})
            else:
                retained.append(ev)
        kept[bucket] = tuple(retained)

    total_before = sum(len(getattr(own, b)) for b in kept)
    retained_findings = DynamicFindings(
        coordinate=own.coordinate,
        modes_seen=own.modes_seen,
        notes=own.notes,
        **kept,
    )
    total_after = sum(len(getattr(retained_findings, b)) for b in kept) + len(attributed)
    assert total_before == total_after  # nothing invented, nothing dropped
    return retained_findings, tuple(attributed)
