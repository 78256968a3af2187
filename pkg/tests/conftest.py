"""Independent oracles and shared fixtures.

The oracles avoid the package's own traversal code so a bug there cannot
hide behind a matching bug here.
"""
from __future__ import annotations

from collections import deque
from itertools import combinations

import pytest
from hypothesis import strategies as st

from reachpres.graph import DemandSet, DirectedGraph


def closure(n: int, edges) -> list[list[bool]]:
    """Boolean transitive closure by Floyd-Warshall; reflexive."""
    reach = [[i == j for j in range(n)] for i in range(n)]
    for u, v in edges:
        reach[u][v] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                row_k = reach[k]
                row_i = reach[i]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    return reach


def bfs(n: int, edges, s: int) -> set[int]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
    seen = {s}
    queue = deque([s])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def alive_edges(g: DirectedGraph, alive) -> list[tuple[int, int]]:
    return [g.edges[e] for e in range(g.edge_count) if alive[e]]


def all_paths(n: int, edges, s: int, t: int, limit: int = 10_000) -> list[list[int]]:
    """Every simple s->t path as an edge-index list, by DFS."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for e, (u, v) in enumerate(edges):
        adj[u].append((e, v))
    out: list[list[int]] = []
    path: list[int] = []
    on = {s}

    def walk(x: int) -> None:
        if len(out) >= limit:
            return
        if x == t:
            out.append(list(path))
            return
        for e, y in adj[x]:
            if y not in on:
                on.add(y)
                path.append(e)
                walk(y)
                path.pop()
                on.discard(y)

    walk(s)
    return out


def all_shortest_paths(n: int, edges, s: int, t: int) -> list[list[int]]:
    """Every minimum-length s->t path (edge indices), by layered BFS."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for e, (u, v) in enumerate(edges):
        adj[u].append((e, v))
    dist = {s: 0}
    queue = deque([s])
    while queue:
        x = queue.popleft()
        for _, y in adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    if t not in dist:
        return []
    out: list[list[int]] = []

    def walk(x: int, path: list[int]) -> None:
        if x == t:
            out.append(list(path))
            return
        for e, y in adj[x]:
            if dist.get(y) == dist[x] + 1 and dist[y] <= dist[t]:
                path.append(e)
                walk(y, path)
                path.pop()

    walk(s, [])
    return out


def brute_min_preserver(g: DirectedGraph, d: DemandSet) -> int:
    """Size of a minimum preserver by plain subset enumeration (no pruning)."""
    full = closure(g.node_count, g.edges)
    live = [(s, t) for s, t in d.pairs if full[s][t]]
    for k in range(g.edge_count + 1):
        for combo in combinations(range(g.edge_count), k):
            sub = [g.edges[e] for e in combo]
            if all(t in bfs(g.node_count, sub, s) for s, t in live):
                return k
    raise AssertionError("unreachable")


def path_graph(n: int) -> DirectedGraph:
    return DirectedGraph(n, [(i, i + 1) for i in range(n - 1)])


@pytest.fixture
def diamond() -> DirectedGraph:
    return DirectedGraph(4, [(0, 1), (0, 2), (1, 3), (2, 3)])


@st.composite
def digraphs(draw, max_nodes: int = 8, max_edges: int = 18, acyclic: bool = False):
    n = draw(st.integers(1, max_nodes))
    if acyclic:
        universe = [(u, v) for u in range(n) for v in range(u + 1, n)]
    else:
        universe = [(u, v) for u in range(n) for v in range(n) if u != v]
    edges = draw(st.lists(st.sampled_from(universe), max_size=max_edges, unique=True)) if universe else []
    return DirectedGraph(n, edges)


@st.composite
def instances(draw, max_nodes: int = 8, max_edges: int = 18, max_pairs: int = 5, acyclic: bool = False):
    g = draw(digraphs(max_nodes, max_edges, acyclic))
    n = g.node_count
    pairs = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=max_pairs))
    return g, DemandSet(pairs)


# ---- acceptance summary -----------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
