"""Directed graphs with stable edge ids, demand sets, SCC condensation.

Everything here is immutable after construction.  Edge ids are positions
in ``DirectedGraph.edges`` and are what preservers are reported in.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import IO, Iterable, NamedTuple, Sequence, Union

log = logging.getLogger(__name__)

Pair = tuple[int, int]


class ContractViolation(RuntimeError):
    """A caller broke an operation's precondition."""


class FormatError(ValueError):
    """Malformed graph or demand file."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DirectedGraph:
    """Adjacency-list digraph on nodes ``0..n-1``.

    Parallel edges are dropped (first occurrence wins), so edge ids are
    dense and deterministic for a given input order.
    """

    __slots__ = ("node_count", "edges", "tails", "heads", "out_adj", "in_adj")

    def __init__(self, node_count: int, edges: Iterable[Pair] = ()) -> None:
        if node_count < 0:
            raise ValueError("node_count must be nonnegative")
        seen: set[Pair] = set()
        kept: list[Pair] = []
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise ValueError(f"node-id out of range in edge ({u}, {v})")
            if (u, v) in seen:
                continue
            seen.add((u, v))
            kept.append((u, v))
        self.node_count = node_count
        self.edges: tuple[Pair, ...] = tuple(kept)
        self.tails = [u for u, _ in kept]
        self.heads = [v for _, v in kept]
        self.out_adj: list[list[int]] = [[] for _ in range(node_count)]
        self.in_adj: list[list[int]] = [[] for _ in range(node_count)]
        for e, (u, v) in enumerate(kept):
            self.out_adj[u].append(e)
            self.in_adj[v].append(e)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def __len__(self) -> int:
        return self.node_count

    def __repr__(self) -> str:
        return f"DirectedGraph(n={self.node_count}, m={len(self.edges)})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return self.node_count == other.node_count and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.node_count, self.edges))

    def reverse(self) -> DirectedGraph:
        """Same edge ids, every edge flipped."""
        return DirectedGraph(self.node_count, ((v, u) for u, v in self.edges))

    def edge_id(self, u: int, v: int) -> int:
        for e in self.out_adj[u]:
            if self.heads[e] == v:
                return e
        raise KeyError((u, v))

    def check_adjacency(self) -> bool:
        """Rebuild both adjacency lists from the edge list and compare."""
        out_adj: list[list[int]] = [[] for _ in range(self.node_count)]
        in_adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for e, (u, v) in enumerate(self.edges):
            out_adj[u].append(e)
            in_adj[v].append(e)
        return out_adj == self.out_adj and in_adj == self.in_adj


@dataclass(frozen=True)
class DemandSet:
    """Pairs whose reachability must be preserved.

    Self-pairs are dropped with a warning and duplicates removed; if
    ``sources`` is given every pair must start at one of them.
    """

    pairs: tuple[Pair, ...]
    sources: tuple[int, ...] | None = None

    def __init__(self, pairs: Iterable[Pair] = (), sources: Iterable[int] | None = None) -> None:
        seen: set[Pair] = set()
        kept: list[Pair] = []
        dropped = 0
        for s, t in pairs:
            s, t = int(s), int(t)
            if s == t:
                dropped += 1
                continue
            if (s, t) not in seen:
                seen.add((s, t))
                kept.append((s, t))
        if dropped:
            log.warning("dropped %d self-pair(s) from demand set", dropped)
        src: tuple[int, ...] | None = None
        if sources is not None:
            src = tuple(dict.fromkeys(int(x) for x in sources))
            allowed = set(src)
            for s, t in kept:
                if s not in allowed:
                    raise ValueError(f"pair ({s}, {t}) starts outside the declared sources")
        object.__setattr__(self, "pairs", tuple(kept))
        object.__setattr__(self, "sources", src)

    def __len__(self) -> int:
        return len(self.pairs)

    def source_nodes(self) -> list[int]:
        """Distinct pair sources, in order of first appearance."""
        return list(dict.fromkeys(s for s, _ in self.pairs))

    def source_count(self) -> int:
        """|S|: declared sources if present, else distinct pair sources."""
        if self.sources is not None:
            return len(self.sources)
        return len(self.source_nodes())

    def by_source(self) -> dict[int, list[int]]:
        groups: dict[int, list[int]] = {}
        for s, t in self.pairs:
            groups.setdefault(s, []).append(t)
        return groups

    def check_range(self, node_count: int) -> None:
        for s, t in self.pairs:
            if not (0 <= s < node_count and 0 <= t < node_count):
                raise ValueError(f"node-id out of range in pair ({s}, {t})")
        for x in self.sources or ():
            if not 0 <= x < node_count:
                raise ValueError(f"node-id out of range in source {x}")


# ---- file formats -----------------------------------------------------------

TextSource = Union[str, IO[str]]


def _data_lines(stream: TextSource) -> list[tuple[int, list[str]]]:
    text = stream if isinstance(stream, str) else stream.read()
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].split()
        if body:
            rows.append((lineno, body))
    return rows


def _ints(tokens: list[str], lineno: int, count: Sequence[int]) -> list[int]:
    if len(tokens) not in count:
        raise FormatError(f"expected {' or '.join(map(str, count))} fields, got {len(tokens)}", lineno)
    try:
        values = [int(tok) for tok in tokens]
    except ValueError:
        raise FormatError(f"non-integer field in {' '.join(tokens)!r}", lineno) from None
    if any(x < 0 for x in values):
        raise FormatError("negative value", lineno)
    return values


def load_graph(stream: TextSource) -> DirectedGraph:
    """Parse ``n m`` followed by ``m`` lines of ``u v``."""
    rows = _data_lines(stream)
    if not rows:
        raise FormatError("empty graph file")
    lineno, head = rows[0]
    n, m = _ints(head, lineno, (2,))
    body = rows[1:]
    if len(body) != m:
        last = body[-1][0] if body else lineno
        raise FormatError(f"inconsistent header: declared {m} edges, found {len(body)}", last)
    edges = []
    for lineno, tokens in body:
        u, v = _ints(tokens, lineno, (2,))
        if u >= n or v >= n:
            raise FormatError(f"node-id out of range ({max(u, v)} >= {n})", lineno)
        edges.append((u, v))
    return DirectedGraph(n, edges)


def load_demands(stream: TextSource, node_count: int | None = None) -> DemandSet:
    """Parse ``p [s]``, then ``p`` pair lines, then ``s`` source lines."""
    rows = _data_lines(stream)
    if not rows:
        raise FormatError("empty demand file")
    lineno, head = rows[0]
    header = _ints(head, lineno, (1, 2))
    p = header[0]
    s = header[1] if len(header) == 2 else None
    expected = p + (s or 0)
    body = rows[1:]
    if len(body) != expected:
        last = body[-1][0] if body else lineno
        raise FormatError(f"inconsistent header: expected {expected} lines, found {len(body)}", last)
    pairs = []
    for lineno, tokens in body[:p]:
        pairs.append(tuple(_ints(tokens, lineno, (2,))))
    sources = None
    if s is not None:
        sources = [_ints(tokens, lineno, (1,))[0] for lineno, tokens in body[p:]]
    if node_count is not None:
        for (lineno, _), (a, b) in zip(body, pairs):
            if a >= node_count or b >= node_count:
                raise FormatError(f"node-id out of range ({max(a, b)} >= {node_count})", lineno)
        for (lineno, _), x in zip(body[p:], sources or ()):
            if x >= node_count:
                raise FormatError(f"node-id out of range ({x} >= {node_count})", lineno)
    try:
        return DemandSet(pairs, sources)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def dump_graph(g: DirectedGraph) -> str:
    lines = [f"{g.node_count} {g.edge_count}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def dump_demands(d: DemandSet) -> str:
    head = f"{len(d.pairs)}" if d.sources is None else f"{len(d.pairs)} {len(d.sources)}"
    lines = [head]
    lines.extend(f"{s} {t}" for s, t in d.pairs)
    lines.extend(str(x) for x in d.sources or ())
    return "\n".join(lines) + "\n"


# ---- reachability -----------------------------------------------------------

def _mask(g: DirectedGraph, edges: Iterable[int] | None) -> bytearray | None:
    if edges is None:
        return None
    if isinstance(edges, bytearray):
        return edges
    mask = bytearray(g.edge_count)
    for e in edges:
        mask[e] = 1
    return mask


def reachable_set(g: DirectedGraph, s: int, edges: Iterable[int] | None = None) -> set[int]:
    """Nodes reachable from ``s`` (including ``s``), optionally using only ``edges``."""
    mask = _mask(g, edges)
    heads, out_adj = g.heads, g.out_adj
    seen = {s}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for e in out_adj[u]:
            if mask is not None and not mask[e]:
                continue
            v = heads[e]
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def coreachable_set(g: DirectedGraph, t: int, edges: Iterable[int] | None = None) -> set[int]:
    """Nodes that reach ``t`` (including ``t``)."""
    mask = _mask(g, edges)
    tails, in_adj = g.tails, g.in_adj
    seen = {t}
    queue = deque([t])
    while queue:
        v = queue.popleft()
        for e in in_adj[v]:
            if mask is not None and not mask[e]:
                continue
            u = tails[e]
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return seen


def shortest_path_edges(g: DirectedGraph, s: int, t: int, edges: Iterable[int] | None = None) -> list[int] | None:
    """Edge ids of one BFS-shortest s->t path, or None if t is unreachable."""
    mask = _mask(g, edges)
    parent: dict[int, int] = {s: -1}
    queue = deque([s])
    while queue and t not in parent:
        u = queue.popleft()
        for e in g.out_adj[u]:
            if mask is not None and not mask[e]:
                continue
            v = g.heads[e]
            if v not in parent:
                parent[v] = e
                queue.append(v)
    if t not in parent:
        return None
    path = []
    x = t
    while x != s:
        e = parent[x]
        path.append(e)
        x = g.tails[e]
    path.reverse()
    return path


def topological_order(g: DirectedGraph) -> list[int] | None:
    """Kahn order, smallest-id-first among ready nodes; None if g has a cycle."""
    indeg = [len(ins) for ins in g.in_adj]
    ready = [v for v in range(g.node_count) if indeg[v] == 0]
    ready.reverse()
    order = []
    while ready:
        u = ready.pop()
        order.append(u)
        fresh = []
        for e in g.out_adj[u]:
            v = g.heads[e]
            indeg[v] -= 1
            if indeg[v] == 0:
                fresh.append(v)
        ready.extend(sorted(fresh, reverse=True))
    if len(order) != g.node_count:
        return None
    return order


class Verdict(NamedTuple):
    ok: bool
    violation: Pair | None = None


def is_preserver(g: DirectedGraph, h_edges: Iterable[int], d: DemandSet) -> Verdict:
    """Check that every demand is reachable in the subgraph iff it is in ``g``."""
    mask = _mask(g, h_edges)
    full: dict[int, set[int]] = {}
    sub: dict[int, set[int]] = {}
    for s, t in d.pairs:
        if s not in full:
            full[s] = reachable_set(g, s)
            sub[s] = reachable_set(g, s, mask)
        if (t in full[s]) != (t in sub[s]):
            return Verdict(False, (s, t))
    return Verdict(True, None)


# ---- strongly connected components ------------------------------------------

def strongly_connected_components(g: DirectedGraph) -> list[list[int]]:
    """Iterative Tarjan.  Components come out in reverse topological order."""
    n = g.node_count
    index = [-1] * n
    low = [0] * n
    on_stack = bytearray(n)
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    heads, out_adj = g.heads, g.out_adj
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = 1
        while work:
            v, i = work[-1]
            adj = out_adj[v]
            if i < len(adj):
                work[-1] = (v, i + 1)
                w = heads[adj[i]]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = 1
                    work.append((w, 0))
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = 0
                    comp.append(w)
                    if w == v:
                        break
                comp.sort()
                comps.append(comp)
    return comps


@dataclass(frozen=True)
class Condensation:
    dag: DirectedGraph
    node_to_scc: tuple[int, ...]
    scc_members: tuple[tuple[int, ...], ...]
    skeleton_edges: frozenset[int]
    edge_representatives: tuple[int, ...]
    original: DirectedGraph = field(repr=False, compare=False)


def _strong_skeleton(g: DirectedGraph, members: Sequence[int], comp_of: list[int], cid: int) -> set[int]:
    # out- and in-arborescence from the first member, intra-SCC edges only
    root = members[0]
    chosen: set[int] = set()
    for adj, ends in ((g.out_adj, g.heads), (g.in_adj, g.tails)):
        seen = {root}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for e in adj[x]:
                y = ends[e]
                if comp_of[y] == cid and y not in seen:
                    seen.add(y)
                    chosen.add(e)
                    queue.append(y)
    return chosen


def condense(g: DirectedGraph, d: DemandSet) -> tuple[Condensation, DemandSet]:
    """Contract SCCs; scc ids follow a topological order of the result."""
    comps = strongly_connected_components(g)
    comps.reverse()
    comp_of = [0] * g.node_count
    for cid, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = cid
    skeleton: set[int] = set()
    for cid, comp in enumerate(comps):
        if len(comp) > 1:
            skeleton |= _strong_skeleton(g, comp, comp_of, cid)
    crossing: dict[Pair, int] = {}
    for e, (u, v) in enumerate(g.edges):
        key = (comp_of[u], comp_of[v])
        if key[0] != key[1] and key not in crossing:
            crossing[key] = e
    dag = DirectedGraph(len(comps), crossing.keys())
    cond = Condensation(
        dag=dag,
        node_to_scc=tuple(comp_of),
        scc_members=tuple(tuple(c) for c in comps),
        skeleton_edges=frozenset(skeleton),
        edge_representatives=tuple(crossing.values()),
        original=g,
    )
    sources = None if d.sources is None else [comp_of[x] for x in d.sources]
    mapped = DemandSet(((comp_of[s], comp_of[t]) for s, t in d.pairs if comp_of[s] != comp_of[t]), sources)
    return cond, mapped


def expand_preserver(c: Condensation, condensed_edges: Iterable[int]) -> set[int]:
    """Skeletons plus one original representative per kept condensed edge."""
    out = set(c.skeleton_edges)
    m = len(c.edge_representatives)
    for e in condensed_edges:
        if not 0 <= e < m:
            raise ContractViolation(f"unknown condensed edge id {e}")
        out.add(c.edge_representatives[e])
    return out
