"""Dependency graph: construction, SCC condensation, topo order, reverse deps.

Nodes are coordinate keys ("registry:name:version"). Edges point from
dependent to dependency and cover runtime deps only. Cycles are legal
(npm has them), so all ordering questions go through the SCC
condensation, which is a DAG by construction.

Tarjan and Kahn are hand-rolled rather than taken from a graph library
to pin down deterministic tie-breaking: node iteration, adjacency, and
the ready-heap all use coordinate sort order, which makes serialized
graphs and queue exports byte-stable.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

from pkgvet.errors import NotInGraphError
from pkgvet.model import DepKind, PackageMetadata, canonical_name
from pkgvet.versions import pick_latest


@dataclass(frozen=True)
class DependencyGraph:
    nodes: dict  # key -> PackageMetadata
    edges: dict  # key -> tuple of dependency keys (sorted)
    warnings: tuple  # human-readable dangling-dep notes
    sccs: tuple = field(default=())  # tuple of tuples of member keys

    def reverse_edges(self) -> dict:
        rev = {k: [] for k in self.nodes}
        for src, deps in self.edges.items():
            for dep in deps:
                rev[dep].append(src)
        return {k: tuple(sorted(v)) for k, v in rev.items()}

    def scc_of(self) -> dict:
        return {member: scc for scc in self.sccs for member in scc}


def build_graph(metas, resolver=pick_latest) -> DependencyGraph:
    """Resolve declared runtime deps against the ingested set.

    A dep edge is added only when some ingested version of the named
    package satisfies the constraint; the pin is the newest satisfying
    version. Unresolvable deps become warnings, never edges. Dev deps
    are dropped here (they stay visible in the metadata).
    """
    metas = sorted(metas, key=lambda m: m.coordinate.sort_key())
    nodes = {m.coordinate.key(): m for m in metas}
    by_name = {}
    for m in metas:
        by_name.setdefault((m.coordinate.registry, m.coordinate.name), []).append(
            m.coordinate.version
        )
    edges = {}
    warnings = []
    for m in metas:
        key = m.coordinate.key()
        deps = set()
        for dep in m.declared_deps:
            if dep.kind is not DepKind.RUNTIME:
                continue
            dep_name = canonical_name(m.coordinate.registry, dep.name)
            versions = by_name.get((m.coordinate.registry, dep_name), [])
            pin = resolver(versions, dep.constraint) if versions else None
            if pin is None:
                warnings.append(f"{key}: dependency {dep.name}@{dep.constraint} not in ingested set")
                continue
            deps.add(f"{m.coordinate.registry.value}:{dep_name}:{pin}")
        edges[key] = tuple(sorted(deps))
    g = DependencyGraph(nodes=nodes, edges=edges, warnings=tuple(warnings))
    return DependencyGraph(nodes=nodes, edges=edges, warnings=tuple(warnings), sccs=condense(g))


def condense(g: DependencyGraph) -> tuple:
    """Tarjan SCCs, iterative. Members sorted inside each component."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    sccs = []
    counter = [0]

    def strongconnect(root):
        work = [(root, iter(g.edges.get(root, ())))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter[0]
                    counter[0] += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(g.edges.get(nxt, ()))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                sccs.append(tuple(sorted(comp)))

    for key in sorted(g.nodes):
        if key not in index:
            strongconnect(key)
    return tuple(sorted(sccs))


def topo_order(g: DependencyGraph) -> list:
    """SCCs ordered dependencies-first; ties broken by smallest member key."""
    member_scc = g.scc_of()
    comp_deps = {scc: set() for scc in g.sccs}
    comp_dependents = {scc: set() for scc in g.sccs}
    for src, deps in g.edges.items():
        for dep in deps:
            a, b = member_scc[src], member_scc[dep]
            if a != b:
                comp_deps[a].add(b)
                comp_dependents[b].add(a)
    pending = {scc: len(deps) for scc, deps in comp_deps.items()}
    ready = [scc for scc, n in pending.items() if n == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        scc = heapq.heappop(ready)
        order.append(scc)
        for dependent in comp_dependents[scc]:
            pending[dependent] -= 1
            if pending[dependent] == 0:
                heapq.heappush(ready, dependent)
    # condensation is acyclic, so everything drains
    assert len(order) == len(g.sccs)
    return order


def reverse_deps(g: DependencyGraph, coord_key: str) -> tuple[set, int]:
    """All transitive dependents of a package plus the amplified downloads.

    Amplified = the package's own downloads plus every transitive
    dependent's downloads, each counted once (cycles collapse into the
    dependent set naturally; the package itself is never in it).
    """
    if coord_key not in g.nodes:
        raise NotInGraphError(f"{coord_key} not in graph")
    rev = g.reverse_edges()
    seen = set()
    frontier = [coord_key]
    while frontier:
        node = frontier.pop()
        for dependent in rev[node]:
            if dependent not in seen and dependent != coord_key:
                seen.add(dependent)
                frontier.append(dependent)
    amplified = g.nodes[coord_key].downloads + sum(g.nodes[d].downloads for d in seen)
    return seen, amplified


def amplified_downloads(g: DependencyGraph) -> dict:
    return {key: reverse_deps(g, key)[1] for key in g.nodes}


def graph_to_json(g: DependencyGraph) -> str:
    doc = {
        "nodes": sorted(g.nodes),
        "edges": [
            {"from": src, "to": dep}
            for src in sorted(g.edges)
            for dep in g.edges[src]
        ],
        "sccs": [list(scc) for scc in g.sccs],
        "warnings": sorted(g.warnings),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
