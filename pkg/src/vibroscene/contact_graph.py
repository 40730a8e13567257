"""Undirected object-contact graph and propagation path queries.

The render loop treats graphs as immutable snapshots: update_contact returns
a new graph, so readers never observe a half-applied change.
"""

from __future__ import annotations

from dataclasses import dataclass

from .agents import InferredScene
from .errors import NoPath, SelfLoop, UnknownNode, ValidationError
from .geometry import DerivedGeometry, SceneModel, contact_pair

DEFAULT_PATH_LIMIT = 10_000


@dataclass(frozen=True)
class PropagationPath:
    """Simple node path ordered from a vibration source to the touched object."""

    nodes: tuple[str, ...]

    @property
    def source(self) -> str:
        return self.nodes[0]

    @property
    def touched(self) -> str:
        return self.nodes[-1]

    @property
    def hop_count(self) -> int:
        return len(self.nodes) - 1


@dataclass(frozen=True)
class ContactGraph:
    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]
    sources: frozenset[str]

    def __post_init__(self):
        for a, b in self.edges:
            if a == b:
                raise SelfLoop(f"self-loop on {a!r}")
            if a not in self.nodes or b not in self.nodes:
                raise ValidationError(f"edge ({a!r}, {b!r}) references unknown node")
        if not self.sources <= self.nodes:
            raise ValidationError("sources must be a subset of nodes")

    def neighbors(self, node: str) -> list[str]:
        out = []
        for a, b in self.edges:
            if a == node:
                out.append(b)
            elif b == node:
                out.append(a)
        return sorted(out)

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {n: [] for n in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        for n in adj:
            adj[n].sort()
        return adj


def build_graph(scene: SceneModel, derived: DerivedGeometry,
                inferred: InferredScene) -> ContactGraph:
    """Nodes from the scene, edges from derived contacts, sources from inference.

    source_override wins in both directions: True forces membership, False
    removes an object even if it was inferred to vibrate.
    """
    nodes = frozenset(scene.object_ids())
    sources = set(inferred.sources()) & nodes
    for obj in scene.objects:
        if obj.source_override is True:
            sources.add(obj.id)
        elif obj.source_override is False:
            sources.discard(obj.id)
    return ContactGraph(
        nodes=nodes,
        edges=frozenset(derived.contacts),
        sources=frozenset(sources),
    )


def all_paths(graph: ContactGraph, touched: str,
              limit: int = DEFAULT_PATH_LIMIT) -> list[PropagationPath]:
    """Every simple path from every source to the touched object, via DFS.

    A touched source contributes the trivial single-node path. Output order
    is deterministic: sources in sorted order, neighbors visited sorted.
    Runs on integer-indexed adjacency lists: this sits on the interactive
    touch path and must fit the per-block budget.
    """
    if touched not in graph.nodes:
        raise UnknownNode(f"unknown object {touched!r}")
    names = sorted(graph.nodes)
    index = {name: i for i, name in enumerate(names)}
    adj: list[list[int]] = [[] for _ in names]
    for a, b in graph.edges:
        adj[index[a]].append(index[b])
        adj[index[b]].append(index[a])
    for neighbors in adj:
        neighbors.sort()
    target = index[touched]
    visited = [False] * len(names)
    found: list[PropagationPath] = []

    def dfs(node: int, path: list[int]) -> None:
        if node == target:
            found.append(PropagationPath(tuple(names[i] for i in path)))
            if len(found) > limit:
                raise ValidationError(f"path enumeration exceeded limit of {limit}")
            return
        for nxt in adj[node]:
            if not visited[nxt]:
                visited[nxt] = True
                path.append(nxt)
                dfs(nxt, path)
                path.pop()
                visited[nxt] = False

    for source in sorted(graph.sources):
        start = index[source]
        visited[start] = True
        dfs(start, [start])
        visited[start] = False
    return found


def shortest_path(paths: list[PropagationPath],
                  per_source: bool = True) -> list[PropagationPath] | PropagationPath:
    """Minimum-hop path selection; ties break on the smaller node-id sequence.

    per_source=True returns one winner per source (sorted by source id);
    per_source=False returns the single overall winner.
    """
    if not paths:
        raise NoPath("no propagation paths to select from")
    best: dict[str, PropagationPath] = {}
    for path in paths:
        current = best.get(path.source)
        if current is None or (path.hop_count, path.nodes) < (current.hop_count, current.nodes):
            best[path.source] = path
    if per_source:
        return [best[s] for s in sorted(best)]
    return min(best.values(), key=lambda p: (p.hop_count, p.nodes))


def update_contact(graph: ContactGraph, a: str, b: str, connected: bool) -> ContactGraph:
    """Return a new graph with the (a, b) edge present or absent."""
    if a not in graph.nodes:
        raise UnknownNode(f"unknown object {a!r}")
    if b not in graph.nodes:
        raise UnknownNode(f"unknown object {b!r}")
    if a == b:
        raise SelfLoop(f"cannot connect {a!r} to itself")
    pair = contact_pair(a, b)
    edges = set(graph.edges)
    if connected:
        edges.add(pair)
    else:
        edges.discard(pair)
    return ContactGraph(nodes=graph.nodes, edges=frozenset(edges), sources=graph.sources)


def set_sources(graph: ContactGraph, sources: set[str]) -> ContactGraph:
    return ContactGraph(nodes=graph.nodes, edges=graph.edges,
                        sources=frozenset(sources))


def to_dot(graph: ContactGraph) -> str:
    """Render the graph as DOT text; sources are drawn as doubled circles."""
    lines = ["graph contacts {"]
    for node in sorted(graph.nodes):
        shape = "doublecircle" if node in graph.sources else "circle"
        lines.append(f'  "{node}" [shape={shape}];')
    for a, b in sorted(graph.edges):
        lines.append(f'  "{a}" -- "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
