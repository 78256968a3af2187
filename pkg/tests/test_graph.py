from __future__ import annotations

import io

import pytest
from hypothesis import given, settings

from conftest import bfs, closure, digraphs, instances, path_graph
from reachpres.graph import (
    ContractViolation,
    DemandSet,
    DirectedGraph,
    FormatError,
    condense,
    coreachable_set,
    dump_demands,
    dump_graph,
    expand_preserver,
    is_preserver,
    load_demands,
    load_graph,
    reachable_set,
    shortest_path_edges,
    strongly_connected_components,
    topological_order,
)
from reachpres.instances import random_digraph


# ---- loading ----------------------------------------------------------------

def test_load_path_graph():
    g = load_graph("3 2\n0 1\n1 2")
    assert g.node_count == 3
    assert g.edges == ((0, 1), (1, 2))


def test_load_dedups_parallel_edges():
    g = load_graph("2 2\n0 1\n0 1")
    assert g.edges == ((0, 1),)


def test_load_rejects_out_of_range_node():
    with pytest.raises(FormatError, match="node-id out of range") as info:
        load_graph("2 1\n0 5")
    assert info.value.line == 2


@pytest.mark.parametrize("text", ["3\n0 1", "3 2\n0 1", "3 1\n0 x", "3 1\n0 1 2", ""])
def test_load_rejects_malformed(text):
    with pytest.raises(FormatError):
        load_graph(text)


def test_load_accepts_comments_and_streams():
    g = load_graph(io.StringIO("# header\n3 2  # n m\n0 1\n\n1 2 # tail\n"))
    assert g.edges == ((0, 1), (1, 2))


def test_demands_round_trip_with_sources():
    d = load_demands("2 1\n0 1\n0 2\n0\n", node_count=3)
    assert d.pairs == ((0, 1), (0, 2))
    assert d.sources == (0,)
    assert load_demands(dump_demands(d)) == d


def test_demands_drop_self_pairs_and_duplicates(caplog):
    d = DemandSet([(0, 1), (1, 1), (0, 1)])
    assert d.pairs == ((0, 1),)
    assert "self-pair" in caplog.text


def test_demands_must_start_in_declared_sources():
    with pytest.raises(ValueError):
        DemandSet([(1, 2)], sources=[0])


@given(digraphs())
def test_dump_load_round_trip(g):
    assert load_graph(dump_graph(g)) == g


@given(digraphs())
def test_adjacency_matches_edge_list(g):
    assert g.check_adjacency()
    assert all(g.tails[e] == u and g.heads[e] == v for e, (u, v) in enumerate(g.edges))


# ---- reachability -----------------------------------------------------------

def test_reachable_on_path():
    g = path_graph(3)
    assert reachable_set(g, 0) == {0, 1, 2}
    assert reachable_set(g, 2) == {2}


def test_reachable_matches_closure_seed7():
    g = random_digraph(6, 10, 7)
    assert reachable_set(g, 0) == {v for v in range(6) if closure(6, g.edges)[0][v]}


@settings(max_examples=200)
@given(digraphs(max_nodes=10, max_edges=30))
def test_reachable_matches_closure(g):
    reach = closure(g.node_count, g.edges)
    for s in range(g.node_count):
        assert reachable_set(g, s) == {v for v in range(g.node_count) if reach[s][v]}
        assert coreachable_set(g, s) == {u for u in range(g.node_count) if reach[u][s]}


@given(digraphs(max_nodes=8, max_edges=20))
def test_reachable_restricted_to_edge_subset(g):
    sub = [e for e in range(g.edge_count) if e % 2 == 0]
    for s in range(g.node_count):
        assert reachable_set(g, s, sub) == bfs(g.node_count, [g.edges[e] for e in sub], s)


@given(digraphs(max_nodes=8, max_edges=20))
def test_shortest_path_is_a_shortest_walk(g):
    for t in range(g.node_count):
        path = shortest_path_edges(g, 0, t)
        if t not in bfs(g.node_count, g.edges, 0):
            assert path is None
            continue
        at = 0
        for e in path:
            assert g.tails[e] == at
            at = g.heads[e]
        assert at == t
        # BFS layer of t equals the path length
        layer, frontier = 0, {0}
        seen = {0}
        while t not in frontier:
            layer += 1
            frontier = {v for u, v in g.edges if u in frontier and v not in seen}
            seen |= frontier
        assert len(path) == layer


@given(digraphs(acyclic=True))
def test_topological_order_on_dags(g):
    order = topological_order(g)
    pos = {v: i for i, v in enumerate(order)}
    assert all(pos[u] < pos[v] for u, v in g.edges)


def test_topological_order_detects_cycle():
    assert topological_order(DirectedGraph(2, [(0, 1), (1, 0)])) is None


# ---- is_preserver -----------------------------------------------------------

def test_is_preserver_examples():
    g = path_graph(3)
    d = DemandSet([(0, 2)])
    assert is_preserver(g, {0, 1}, d).ok
    verdict = is_preserver(g, {g.edge_id(0, 1)}, d)
    assert not verdict.ok and verdict.violation == (0, 2)
    g2 = DirectedGraph(3, [(1, 0), (2, 1)])
    assert is_preserver(g2, set(), d).ok


# ---- SCCs and condensation --------------------------------------------------

@settings(max_examples=200)
@given(digraphs(max_nodes=10, max_edges=30))
def test_scc_matches_mutual_reachability(g):
    reach = closure(g.node_count, g.edges)
    comps = strongly_connected_components(g)
    assert sorted(v for c in comps for v in c) == list(range(g.node_count))
    for comp in comps:
        for u in comp:
            for v in range(g.node_count):
                assert (v in comp) == (reach[u][v] and reach[v][u])


def test_condense_three_cycle():
    g = DirectedGraph(3, [(0, 1), (1, 2), (2, 0)])
    cond, mapped = condense(g, DemandSet([(0, 1)]))
    assert cond.dag.node_count == 1 and cond.dag.edge_count == 0
    assert mapped.pairs == ()
    assert len(cond.skeleton_edges) <= 4
    assert is_preserver(g, cond.skeleton_edges, DemandSet([(u, v) for u in range(3) for v in range(3)])).ok


def test_condense_dag_is_identity():
    g = DirectedGraph(4, [(0, 1), (1, 2), (0, 3)])
    d = DemandSet([(0, 2), (1, 2)])
    cond, mapped = condense(g, d)
    assert cond.skeleton_edges == frozenset()
    assert cond.dag.edge_count == g.edge_count
    relabel = cond.node_to_scc
    assert {(relabel[u], relabel[v]) for u, v in g.edges} == set(cond.dag.edges)
    assert mapped.pairs == tuple((relabel[s], relabel[t]) for s, t in d.pairs)
    assert expand_preserver(cond, set()) == set()


def test_condense_two_two_cycles():
    g = DirectedGraph(4, [(0, 1), (1, 0), (2, 3), (3, 2), (1, 2)])
    d = DemandSet([(0, 3)])
    cond, mapped = condense(g, d)
    assert cond.dag.node_count == 2 and cond.dag.edge_count == 1
    c0, c1 = cond.node_to_scc[0], cond.node_to_scc[3]
    assert mapped.pairs == ((c0, c1),)
    kept = expand_preserver(cond, {0})
    assert kept == set(range(5))
    assert is_preserver(g, kept, d).ok


def test_expand_rejects_unknown_edge():
    cond, _ = condense(path_graph(3), DemandSet())
    with pytest.raises(ContractViolation):
        expand_preserver(cond, {7})


@settings(max_examples=200)
@given(instances(max_nodes=10, max_edges=30))
def test_condensation_properties(inst):
    g, d = inst
    cond, mapped = condense(g, d)
    assert topological_order(cond.dag) is not None
    assert all(u < v for u, v in cond.dag.edges)
    n_scc = len(cond.scc_members)
    assert len(cond.skeleton_edges) <= 2 * (g.node_count - n_scc)
    for members in cond.scc_members:
        inside = [g.edges[e] for e in cond.skeleton_edges]
        for u in members:
            assert set(members) <= bfs(g.node_count, inside, u)
    # crossing edges of the original map onto dag edges and back
    crossing = {(cond.node_to_scc[u], cond.node_to_scc[v]) for u, v in g.edges}
    crossing = {c for c in crossing if c[0] != c[1]}
    assert crossing == set(cond.dag.edges)
    for ce, oe in enumerate(cond.edge_representatives):
        u, v = g.edges[oe]
        assert (cond.node_to_scc[u], cond.node_to_scc[v]) == cond.dag.edges[ce]
    # reachability round trip
    full = closure(g.node_count, g.edges)
    dag_reach = closure(cond.dag.node_count, cond.dag.edges)
    for s, t in d.pairs:
        assert full[s][t] == dag_reach[cond.node_to_scc[s]][cond.node_to_scc[t]]
    # expanding the full condensed edge set preserves everything
    assert is_preserver(g, expand_preserver(cond, range(cond.dag.edge_count)), d).ok
    assert len(mapped.pairs) == len(set(mapped.pairs))
