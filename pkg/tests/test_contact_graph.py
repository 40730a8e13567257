import json

import numpy as np
import pytest

import oracles
from conftest import make_engine, scene_bytes
from vibroscene.agents import infer_scene
from vibroscene.contact_graph import (
    ContactGraph,
    PropagationPath,
    all_paths,
    build_graph,
    shortest_path,
    to_dot,
    update_contact,
)
from vibroscene.errors import NoPath, SelfLoop, UnknownNode, ValidationError
from vibroscene.geometry import derive_geometry, load_scene


def graph_of(nodes, edges, sources) -> ContactGraph:
    return ContactGraph(
        nodes=frozenset(nodes),
        edges=frozenset(tuple(sorted(e)) for e in edges),
        sources=frozenset(sources),
    )


def path_set(paths):
    return {p.nodes for p in paths}


class TestBuildGraph:
    def test_bundled_smartphone_scene(self, smartphone_engine):
        graph = smartphone_engine.graph
        assert graph.nodes == {"floor", "table", "smartphone"}
        assert graph.edges == {("floor", "table"), ("smartphone", "table")}
        assert graph.sources == {"smartphone"}

    def test_no_vibrating_objects(self):
        doc = {
            "scene_name": "plain", "scene_images": [],
            "objects": [{"id": "t", "name": "Wooden Table",
                         "position": [0, 0.4, 0], "size": [1, 0.05, 1]}],
        }
        scene = load_scene(json.dumps(doc).encode())
        derived = derive_geometry(scene)
        from vibroscene.agents import MockBackend

        inferred = infer_scene(scene, derived, MockBackend())
        assert build_graph(scene, derived, inferred).sources == frozenset()

    def test_source_override_false_wins(self):
        doc = json.loads(scene_bytes("study2_smartphone"))
        doc["objects"][2]["source_override"] = False
        scene = load_scene(json.dumps(doc).encode())
        derived = derive_geometry(scene)
        from vibroscene.agents import MockBackend

        inferred = infer_scene(scene, derived, MockBackend())
        assert inferred.objects["smartphone"].analysis.should_vibrate is True
        assert build_graph(scene, derived, inferred).sources == frozenset()

    def test_source_override_true_adds(self):
        doc = json.loads(scene_bytes("study2_smartphone"))
        doc["objects"][1]["source_override"] = True
        scene = load_scene(json.dumps(doc).encode())
        derived = derive_geometry(scene)
        from vibroscene.agents import MockBackend

        inferred = infer_scene(scene, derived, MockBackend())
        assert build_graph(scene, derived, inferred).sources == {"smartphone", "table"}


class TestAllPaths:
    def test_touch_floor_single_path(self, smartphone_engine):
        paths = all_paths(smartphone_engine.graph, "floor")
        assert path_set(paths) == {("smartphone", "table", "floor")}
        assert paths[0].hop_count == 2

    def test_touch_the_source_itself(self, smartphone_engine):
        paths = all_paths(smartphone_engine.graph, "smartphone")
        assert path_set(paths) == {("smartphone",)}
        assert paths[0].hop_count == 0

    def test_four_node_cycle_two_paths(self):
        graph = graph_of("abcd", [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")], "a")
        paths = all_paths(graph, "c")
        assert path_set(paths) == {("a", "b", "c"), ("a", "d", "c")}

    def test_unknown_node(self, smartphone_engine):
        with pytest.raises(UnknownNode):
            all_paths(smartphone_engine.graph, "ghost")

    def test_unreachable_returns_empty(self):
        graph = graph_of("abc", [("a", "b")], "a")
        assert all_paths(graph, "c") == []

    def test_paths_are_simple(self):
        graph = graph_of("abcde",
                         [("a", "b"), ("b", "c"), ("c", "d"), ("d", "b"),
                          ("d", "e"), ("a", "e")], "a")
        for path in all_paths(graph, "d"):
            assert len(set(path.nodes)) == len(path.nodes)

    def test_path_limit_guard(self):
        nodes = [f"n{i}" for i in range(10)]
        edges = [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]]
        graph = graph_of(nodes, edges, ["n0"])
        with pytest.raises(ValidationError, match="limit"):
            all_paths(graph, "n9", limit=50)

    def test_insertion_order_invariance(self):
        rng = np.random.default_rng(11)
        nodes = list("abcdef")
        edges = [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "f"),
                 ("a", "d"), ("b", "e")]
        baseline = None
        for _ in range(5):
            shuffled = list(edges)
            rng.shuffle(shuffled)
            graph = graph_of(nodes, shuffled, ["a"])
            result = path_set(all_paths(graph, "f"))
            chosen = shortest_path(all_paths(graph, "f"), per_source=False)
            if baseline is None:
                baseline = (result, chosen)
            assert (result, chosen) == baseline


class TestShortestPath:
    def test_minimum_of_two(self):
        p2 = PropagationPath(("s", "a", "t"))
        p3 = PropagationPath(("s", "a", "b", "t"))
        assert shortest_path([p3, p2], per_source=False) == p2

    def test_lexicographic_tie_break(self):
        pa = PropagationPath(("s", "a", "t"))
        pb = PropagationPath(("s", "b", "t"))
        assert shortest_path([pb, pa], per_source=False) == pa

    def test_per_source_selection(self):
        paths = [
            PropagationPath(("s1", "x", "t")),
            PropagationPath(("s1", "t")),
            PropagationPath(("s2", "x", "y", "t")),
        ]
        winners = shortest_path(paths, per_source=True)
        assert [w.nodes for w in winners] == [("s1", "t"), ("s2", "x", "y", "t")]

    def test_empty_input(self):
        with pytest.raises(NoPath):
            shortest_path([], per_source=False)

    def test_random_graphs_match_enumeration_oracle(self):
        rng = np.random.default_rng(1234)
        for _ in range(60):
            n = int(rng.integers(2, 9))
            nodes = [f"n{i}" for i in range(n)]
            pairs = [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]]
            density = rng.uniform(0.2, 0.7)
            edges = [p for p in pairs if rng.random() < density]
            sources = [x for x in nodes if rng.random() < 0.3] or [nodes[0]]
            touched = nodes[int(rng.integers(0, n))]
            graph = graph_of(nodes, edges, sources)

            engine = all_paths(graph, touched)
            expected = oracles.enumerate_source_paths(nodes, edges, sources, touched)
            assert path_set(engine) == set(expected)
            if expected:
                winners = shortest_path(engine, per_source=True)
                oracle_best = oracles.pick_shortest_per_source(expected)
                assert {w.source: w.nodes for w in winners} == oracle_best


class TestUpdateContact:
    def test_disconnect_kills_paths(self, smartphone_engine):
        graph = update_contact(smartphone_engine.graph, "table", "floor", False)
        assert all_paths(graph, "floor") == []
        # the original snapshot is untouched
        assert all_paths(smartphone_engine.graph, "floor") != []

    def test_add_then_remove_restores(self, smartphone_engine):
        graph = smartphone_engine.graph
        modified = update_contact(graph, "smartphone", "floor", True)
        restored = update_contact(modified, "smartphone", "floor", False)
        assert restored == graph

    def test_random_sequence_matches_set_replay(self):
        rng = np.random.default_rng(5)
        nodes = [f"n{i}" for i in range(6)]
        graph = graph_of(nodes, [], ["n0"])
        shadow: set[tuple[str, str]] = set()
        for _ in range(200):
            a, b = rng.choice(nodes, size=2, replace=False)
            connect = bool(rng.random() < 0.5)
            graph = update_contact(graph, str(a), str(b), connect)
            pair = tuple(sorted((str(a), str(b))))
            if connect:
                shadow.add(pair)
            else:
                shadow.discard(pair)
            assert graph.edges == shadow

    def test_removing_edge_never_increases_paths(self):
        rng = np.random.default_rng(21)
        nodes = list("abcdef")
        pairs = [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]]
        edges = [p for p in pairs if rng.random() < 0.6]
        graph = graph_of(nodes, edges, ["a"])
        before = len(all_paths(graph, "f"))
        for a, b in list(graph.edges):
            after = len(all_paths(update_contact(graph, a, b, False), "f"))
            assert after <= before

    def test_errors(self, smartphone_engine):
        with pytest.raises(UnknownNode):
            update_contact(smartphone_engine.graph, "ghost", "floor", True)
        with pytest.raises(SelfLoop):
            update_contact(smartphone_engine.graph, "floor", "floor", True)


def test_dot_export(smartphone_engine):
    dot = to_dot(smartphone_engine.graph)
    assert '"smartphone" [shape=doublecircle];' in dot
    assert '"floor" -- "table";' in dot


def test_engines_are_consistent_across_construction(bundled_engines):
    for name, engine in bundled_engines.items():
        rebuilt = make_engine(name)
        assert rebuilt.graph == engine.graph
