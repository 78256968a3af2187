"""Seeded random instance families used by tests, benchmarks and the CLI."""
from __future__ import annotations

from .graph import DemandSet, DirectedGraph, reachable_set
from .rng import stream


def random_digraph(n: int, m: int, seed: int) -> DirectedGraph:
    """``m`` distinct non-loop edges drawn uniformly (cycles allowed)."""
    if m > n * (n - 1):
        raise ValueError(f"cannot place {m} edges on {n} nodes")
    rng = stream(seed, "random-digraph")
    chosen: dict[tuple[int, int], None] = {}
    while len(chosen) < m:
        u, v = rng.randrange(n), rng.randrange(n)
        if u != v:
            chosen.setdefault((u, v))
    return DirectedGraph(n, chosen)


def random_dag(n: int, m: int, seed: int) -> DirectedGraph:
    """``m`` distinct edges ``u -> v`` with ``u < v``; node order is topological."""
    if m > n * (n - 1) // 2:
        raise ValueError(f"cannot place {m} forward edges on {n} nodes")
    rng = stream(seed, "random-dag")
    chosen: dict[tuple[int, int], None] = {}
    while len(chosen) < m:
        u, v = rng.randrange(n), rng.randrange(n)
        if u != v:
            chosen.setdefault((min(u, v), max(u, v)))
    return DirectedGraph(n, chosen)


def random_demands(
    g: DirectedGraph,
    pairs: int,
    seed: int,
    *,
    sources: int | None = None,
    reachable_only: bool = False,
    declare_sources: bool = False,
) -> DemandSet:
    """Random demand pairs; with ``sources`` they start in a random source set.

    ``reachable_only`` draws targets from each source's reachable set, so
    every demand is satisfiable.
    """
    rng = stream(seed, "random-demands")
    n = g.node_count
    pool = list(range(n))
    if sources is not None:
        src = sorted(rng.sample(pool, min(sources, n)))
    else:
        src = pool
    reach = {}
    out: dict[tuple[int, int], None] = {}
    tries = 0
    while len(out) < pairs and tries < 50 * pairs + 100:
        tries += 1
        s = rng.choice(src)
        if reachable_only:
            if s not in reach:
                reach[s] = sorted(reachable_set(g, s) - {s})
            if not reach[s]:
                continue
            t = rng.choice(reach[s])
        else:
            t = rng.randrange(n)
        if t != s:
            out.setdefault((s, t))
    return DemandSet(out, src if declare_sources else None)
