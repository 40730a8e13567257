#!/usr/bin/env python3
"""Contact graph queries: path enumeration, shortest selection, live edits.

Builds the speaker scene's graph, enumerates every simple path from the
source to a touched object, then rearranges the scene at runtime (table
pulled away from the floor) and shows the queries tracking the change.
"""

from pathlib import Path

from vibroscene import (
    CorpusManifest,
    MockBackend,
    all_paths,
    build_engine,
    shortest_path,
    update_contact,
)
from vibroscene.contact_graph import to_dot

ROOT = Path(__file__).resolve().parent.parent

engine = build_engine(
    (ROOT / "scenes" / "study2_speaker.json").read_bytes(),
    MockBackend(),
    CorpusManifest.load(ROOT / "corpus" / "manifest.json"),
)
graph = engine.graph

print("graph:", sorted(graph.nodes), "sources:", sorted(graph.sources))
print()
for touched in ("speaker", "table", "floor"):
    paths = all_paths(graph, touched)
    print(f"touch {touched!r}: {len(paths)} path(s)")
    for p in paths:
        print(f"    {' -> '.join(p.nodes)}  ({p.hop_count} hops)")
    if paths:
        best = shortest_path(paths, per_source=False)
        print(f"    selected: {' -> '.join(best.nodes)}")

print()
print("now disconnect table from floor (user lifts the table):")
lifted = update_contact(graph, "table", "floor", False)
print(f"  touch 'floor': {len(all_paths(lifted, 'floor'))} path(s) -> unreachable, silence")
print(f"  original snapshot still answers: {len(all_paths(graph, 'floor'))} path(s)")

print()
print("DOT export (render with graphviz if you like):")
print(to_dot(graph))
