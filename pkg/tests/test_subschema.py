from __future__ import annotations

import random
from itertools import combinations

import pytest

from sqlsynth.errors import GraphTooLargeError, NotConnectedError
from sqlsynth.schema import ForeignKey, ingest_ddl
from sqlsynth.subschema import (
    JoinGraph,
    build_join_graph,
    choose_spanning_joins,
    enumerate_subschemas,
    load_subschemas,
    save_subschemas,
)


def graph_of(nodes, pairs) -> JoinGraph:
    graph = JoinGraph(nodes=sorted(nodes))
    for a, b in pairs:
        pair = tuple(sorted((a, b)))
        graph.edges.setdefault(pair, []).append(
            ForeignKey(from_table=pair[0], from_columns=("x",), to_table=pair[1], to_columns=("y",))
        )
    return graph


def brute_force_connected_subsets(nodes, pairs, min_size=1, max_size=None):
    """Independent oracle: test every nonempty subset for connectivity."""
    adj = {n: set() for n in nodes}
    for a, b in pairs:
        adj[a].add(b)
        adj[b].add(a)
    max_size = max_size or len(nodes)
    out = set()
    for k in range(min_size, max_size + 1):
        for subset in combinations(sorted(nodes), k):
            members = set(subset)
            seen = {subset[0]}
            stack = [subset[0]]
            while stack:
                u = stack.pop()
                for v in adj[u]:
                    if v in members and v not in seen:
                        seen.add(v)
                        stack.append(v)
            if len(seen) == len(members):
                out.add(subset)
    return out


class TestBuildJoinGraph:
    def test_two_tables_one_edge(self, tiny_catalog):
        graph = build_join_graph(tiny_catalog)
        assert graph.nodes == ["nation", "region"]
        assert list(graph.edges) == [("nation", "region")]

    def test_no_fks_isolated_nodes(self):
        catalog = ingest_ddl("CREATE TABLE a (x INT); CREATE TABLE b (y INT); CREATE TABLE c (z INT)")
        graph = build_join_graph(catalog)
        assert graph.nodes == ["a", "b", "c"]
        assert graph.edges == {}

    def test_parallel_fks_collapse_to_one_edge(self):
        catalog = ingest_ddl(
            "CREATE TABLE a (x INT PRIMARY KEY);"
            "CREATE TABLE b (p INT, q INT,"
            " FOREIGN KEY (p) REFERENCES a (x), FOREIGN KEY (q) REFERENCES a (x))"
        )
        graph = build_join_graph(catalog)
        assert len(graph.edges) == 1
        assert len(graph.edges[("a", "b")]) == 2

    def test_tpch_graph_shape(self, tpch_catalog_inferred):
        graph = build_join_graph(tpch_catalog_inferred)
        assert len(graph.nodes) == 8
        assert len(graph.edges) == 10


class TestEnumerate:
    def test_path_graph(self):
        graph = graph_of("abc", [("a", "b"), ("b", "c")])
        tables = [s.tables for s in enumerate_subschemas(graph)]
        assert tables == [("a",), ("b",), ("c",), ("a", "b"), ("b", "c"), ("a", "b", "c")]

    def test_single_node(self):
        assert len(enumerate_subschemas(graph_of("a", []))) == 1

    def test_min_tables_excludes_singletons(self):
        graph = graph_of("abc", [("a", "b"), ("b", "c")])
        tables = [s.tables for s in enumerate_subschemas(graph, min_tables=2)]
        assert tables == [("a", "b"), ("b", "c"), ("a", "b", "c")]

    def test_max_tables_cap(self):
        graph = graph_of("abc", [("a", "b"), ("b", "c")])
        tables = [s.tables for s in enumerate_subschemas(graph, max_tables=2)]
        assert tables == [("a",), ("b",), ("c",), ("a", "b"), ("b", "c")]

    def test_deterministic(self, tpch_catalog_inferred):
        graph = build_join_graph(tpch_catalog_inferred)
        first = enumerate_subschemas(graph)
        second = enumerate_subschemas(graph)
        assert first == second

    def test_safety_limit(self):
        graph = graph_of([f"t{i:02d}" for i in range(30)], [])
        with pytest.raises(GraphTooLargeError):
            enumerate_subschemas(graph)

    def test_every_subschema_connected_and_spanned(self, tpch_catalog_inferred):
        graph = build_join_graph(tpch_catalog_inferred)
        for sub in enumerate_subschemas(graph):
            assert len(sub.spanning_joins) == len(sub.tables) - 1
            # re-check connectivity independently via the spanning joins
            if len(sub.tables) > 1:
                adj = {t: set() for t in sub.tables}
                for fk in sub.spanning_joins:
                    adj[fk.from_table].add(fk.to_table)
                    adj[fk.to_table].add(fk.from_table)
                seen = {sub.tables[0]}
                stack = [sub.tables[0]]
                while stack:
                    u = stack.pop()
                    for v in adj[u]:
                        if v not in seen:
                            seen.add(v)
                            stack.append(v)
                assert seen == set(sub.tables)

    def test_matches_oracle_on_tpch(self, tpch_catalog_inferred):
        graph = build_join_graph(tpch_catalog_inferred)
        expected = brute_force_connected_subsets(graph.nodes, list(graph.edges))
        got = {s.tables for s in enumerate_subschemas(graph)}
        assert got == expected

    @pytest.mark.parametrize("trial", range(10))
    def test_matches_oracle_on_random_graphs(self, trial):
        rng = random.Random(2100 + trial)
        n = rng.randint(1, 12)
        nodes = [f"t{i:02d}" for i in range(n)]
        pairs = [pair for pair in combinations(nodes, 2) if rng.random() < 0.3]
        graph = graph_of(nodes, pairs)
        expected = brute_force_connected_subsets(nodes, pairs)
        got = [s.tables for s in enumerate_subschemas(graph)]
        assert len(got) == len(set(got)), "duplicate subschemas emitted"
        assert set(got) == expected


class TestSpanningJoins:
    def test_pair(self):
        graph = graph_of("ab", [("a", "b")])
        joins = choose_spanning_joins(graph, {"a", "b"})
        assert len(joins) == 1

    def test_triangle_lexicographic_tree(self):
        graph = graph_of("abc", [("a", "b"), ("a", "c"), ("b", "c")])
        joins = choose_spanning_joins(graph, {"a", "b", "c"})
        picked = {tuple(sorted((fk.from_table, fk.to_table))) for fk in joins}
        assert picked == {("a", "b"), ("a", "c")}

    def test_disconnected_raises(self):
        graph = graph_of("abc", [("a", "b"), ("b", "c")])
        with pytest.raises(NotConnectedError):
            choose_spanning_joins(graph, {"a", "c"})


class TestCounts:
    """Documented counts for the reproduction procedure (see acceptance)."""

    def test_tpch_count_combinations(self, tpch_catalog, tpch_catalog_inferred):
        declared_graph = build_join_graph(tpch_catalog)
        union_graph = build_join_graph(tpch_catalog_inferred)
        counts = {
            ("declared", "with_singletons"): len(enumerate_subschemas(declared_graph)),
            ("declared", "no_singletons"): len(enumerate_subschemas(declared_graph, min_tables=2)),
            ("declared+inferred", "with_singletons"): len(enumerate_subschemas(union_graph)),
            ("declared+inferred", "no_singletons"): len(
                enumerate_subschemas(union_graph, min_tables=2)
            ),
        }
        assert counts == {
            ("declared", "with_singletons"): 98,
            ("declared", "no_singletons"): 90,
            ("declared+inferred", "with_singletons"): 98,
            ("declared+inferred", "no_singletons"): 90,
        }

    def test_inferred_only_counts(self, tpch_bare_catalog):
        from sqlsynth.schema import infer_foreign_keys

        graph = build_join_graph(infer_foreign_keys(tpch_bare_catalog))
        assert len(enumerate_subschemas(graph)) == 93
        assert len(enumerate_subschemas(graph, min_tables=2)) == 85


class TestSerialization:
    def test_jsonl_round_trip(self, tmp_path, tpch_catalog_inferred):
        graph = build_join_graph(tpch_catalog_inferred)
        subs = enumerate_subschemas(graph, max_tables=3)
        path = tmp_path / "subschemas.jsonl"
        save_subschemas(subs, path)
        assert load_subschemas(path) == subs
