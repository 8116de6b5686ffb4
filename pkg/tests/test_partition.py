import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from mapsynth.compat import CompatibilityGraph
from mapsynth.partition import (DisjointSet, Partitioning, connected_components, exact_partition,
                                greedy_partition, hash_to_min, is_feasible, objective, partition_graph,
                                read_partitions, write_partitions)
from oracles import best_partition_score, components


def test_five_table_greedy(five_table_graph):
    p = greedy_partition(five_table_graph, -0.2)
    assert p.as_sets() == {frozenset({"B1", "B2"}), frozenset({"B3", "B4", "B5"})}
    assert objective(p, five_table_graph) == pytest.approx(2.77, abs=1e-9)
    assert [(a, b) for a, b, _ in p.merges] == [(("B3",), ("B5",)), (("B3", "B5"), ("B4",)), (("B1",), ("B2",))]


def test_five_table_exact(five_table_graph):
    p = exact_partition(five_table_graph, -0.2)
    assert p.as_sets() == {frozenset({"B1", "B2"}), frozenset({"B3", "B4", "B5"})}
    assert objective(p, five_table_graph) == pytest.approx(2.77, abs=1e-9)


def test_trivial_graphs():
    only_neg = CompatibilityGraph(("a", "b", "c"), {}, {("a", "b"): -0.9, ("b", "c"): -0.5})
    assert len(greedy_partition(only_neg).parts) == 3
    only_pos = CompatibilityGraph(("a", "b", "c", "d"), {("a", "b"): 0.9, ("b", "c"): 0.9, ("c", "d"): 0.95})
    assert greedy_partition(only_pos).parts == [("a", "b", "c", "d")]
    assert objective(Partitioning([("a", "b", "c", "d")]), only_pos) == pytest.approx(2.75)
    singletons = Partitioning([("a",), ("b",), ("c",), ("d",)])
    assert objective(singletons, only_pos) == 0


def test_exact_small_cases():
    g = CompatibilityGraph(("a", "b"), {}, {("a", "b"): -0.5})
    assert exact_partition(g).parts == [("a",), ("b",)]
    tri = CompatibilityGraph(("a", "b", "c"), {("a", "b"): 0.9, ("a", "c"): 0.9, ("b", "c"): 0.9})
    assert exact_partition(tri).parts == [("a", "b", "c")]
    with pytest.raises(ValueError):
        exact_partition(CompatibilityGraph(tuple(str(i) for i in range(11))))


def test_objective_rejects_unknown_vertex(five_table_graph):
    with pytest.raises(ValueError):
        objective(Partitioning([("B1", "X")]), five_table_graph)


def test_components_examples():
    g = CompatibilityGraph(tuple("abcde"))
    assert len(connected_components(g)) == 5
    path = CompatibilityGraph(tuple("abcde"), {("a", "b"): 0.9, ("b", "c"): 0.9, ("d", "e"): 0.9},
                              {("c", "d"): -0.5})
    assert [c.vertices for c in connected_components(path)] == [tuple("abcde")]


def random_graph(rng, n, p_pos=0.3, p_neg=0.15):
    verts = tuple(f"v{i:02d}" for i in range(n))
    pos, neg = {}, {}
    for a, b in itertools.combinations(verts, 2):
        r = rng.random()
        if r < p_pos:
            pos[(a, b)] = round(rng.uniform(0.85, 1.0), 3)
        elif r < p_pos + p_neg:
            neg[(a, b)] = round(rng.uniform(-1.0, -0.01), 3)
    return CompatibilityGraph(verts, pos, neg)


def test_hash_to_min_matches_union_find_on_1000_graphs():
    rng = random.Random(2024)
    for _ in range(1000):
        n = rng.randint(1, 30)
        verts = list(range(n))
        edges = [(a, b) for a, b in itertools.combinations(verts, 2) if rng.random() < 2.0 / max(n, 1)]
        adj = {v: set() for v in verts}
        for a, b in edges:
            adj[a].add(b)
            adj[b].add(a)
        labels = hash_to_min(verts, adj)
        got = {}
        for v, lab in labels.items():
            got.setdefault(lab, set()).add(v)
        assert {frozenset(s) for s in got.values()} == components(verts, edges)
        assert all(lab == min(got[lab]) for lab in got)


def test_disjoint_set():
    ds = DisjointSet(range(6))
    ds.union(0, 1)
    ds.union(2, 3)
    ds.union(1, 3)
    assert ds.find(0) == ds.find(2)
    assert ds.find(ds.find(4)) == ds.find(4)
    assert sorted(ds.groups()) == [[0, 1, 2, 3], [4], [5]]


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=300)
@given(seeds, st.integers(1, 25))
def test_greedy_feasible_and_covering(seed, n):
    g = random_graph(random.Random(seed), n)
    p = greedy_partition(g, -0.2)
    assert is_feasible(p, g, -0.2)
    assert sorted(v for part in p.parts for v in part) == list(g.vertices)


@settings(max_examples=150)
@given(seeds, st.integers(1, 8))
def test_greedy_never_beats_exact(seed, n):
    g = random_graph(random.Random(seed), n)
    greedy = objective(greedy_partition(g, -0.2), g)
    exact = exact_partition(g, -0.2)
    best = objective(exact, g)
    assert is_feasible(exact, g, -0.2)
    assert greedy <= best + 1e-9
    assert best == pytest.approx(best_partition_score(g, -0.2))


@settings(max_examples=100)
@given(seeds, st.integers(2, 30))
def test_componentwise_equals_whole(seed, n):
    g = random_graph(random.Random(seed), n, p_pos=0.08, p_neg=0.04)
    whole = greedy_partition(g, -0.2)
    split, info = partition_graph(g, -0.2)
    assert split.parts == whole.parts
    assert info["objective"] == pytest.approx(objective(whole, g))


def test_partition_graph_parallel_identical():
    g = random_graph(random.Random(9), 60, p_pos=0.05, p_neg=0.03)
    assert partition_graph(g, workers=1)[0].parts == partition_graph(g, workers=4)[0].parts


def test_partition_jsonl(tmp_path, five_table_graph):
    p = greedy_partition(five_table_graph)
    path = tmp_path / "p.jsonl"
    write_partitions(p, path)
    assert read_partitions(path) == [("p000000", ["B1", "B2"]), ("p000001", ["B3", "B4", "B5"])]
