"""Reachability preserver construction.

``build_preserver`` contracts SCCs, then shrinks the condensed DAG by
speculative deletions run in several *universes* at once: each universe
holds one ``DecrementalReach`` per demand source and tries a different
sampled edge; universes advance in round-robin steps and the first one
whose deletion keeps every demand reachable wins.  The others rewind and
replay the winning deletion, so all universes stay identical between
rounds.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator

from .decremental import DecrementalReach
from .graph import (
    DemandSet,
    DirectedGraph,
    condense,
    coreachable_set,
    expand_preserver,
    reachable_set,
    topological_order,
)
from .rng import stream

log = logging.getLogger(__name__)

Number = int | Fraction


class BudgetExceeded(ValueError):
    """Brute-force oracle refused an instance over its edge budget."""


# ---- extremal bounds --------------------------------------------------------

def _ceil_sum_with_root(c: Fraction, base: int, radicand: int, degree: Fraction) -> int:
    """Smallest integer F >= c*(base + radicand**degree), decided exactly.

    ``degree`` is 1/2 or 2/3; the comparison is done on integer powers.
    """
    num, den = degree.numerator, degree.denominator

    def big_enough(f: int) -> bool:
        rest = Fraction(f) / c - base  # need rest >= radicand**(num/den)
        if rest < 0:
            return False
        return rest ** den >= Fraction(radicand) ** num

    guess = math.ceil(float(c) * (base + float(radicand) ** float(degree)))
    guess = max(guess, 0)
    while big_enough(guess - 1) and guess > 0:
        guess -= 1
    while not big_enough(guess):
        guess += 1
    return guess


def bound_source_restricted(n: int, p: int, s: int, c: Number = 1) -> int:
    """ceil(c * (n + sqrt(n*p*s)))."""
    if min(n, p, s) < 0:
        raise ValueError("n, p, s must be nonnegative")
    return _ceil_sum_with_root(Fraction(c), n, n * p * s, Fraction(1, 2))


def bound_pairwise(n: int, p: int, c: Number = 1) -> int:
    """ceil(c * (n + (n*p)**(2/3)))."""
    if min(n, p) < 0:
        raise ValueError("n, p must be nonnegative")
    return _ceil_sum_with_root(Fraction(c), n, n * p, Fraction(2, 3))


@dataclass(frozen=True)
class BoundSpec:
    kind: str  # "source-restricted" | "pairwise"
    c: Fraction
    f: int
    n: int
    p: int
    s: int

    @classmethod
    def compute(cls, kind: str, n: int, p: int, s: int, c: Number = 1, cap: int | None = None) -> BoundSpec:
        if kind == "source-restricted":
            f = bound_source_restricted(n, p, s, c)
        elif kind == "pairwise":
            f = bound_pairwise(n, p, c)
        else:
            raise ValueError(f"unknown bound kind {kind!r}")
        if cap is not None:
            f = min(f, cap)
        return cls(kind, Fraction(c), f, n, p, s)


# ---- configuration and result -----------------------------------------------

@dataclass(frozen=True)
class AlgoConfig:
    """Knobs for ``build_preserver``.

    ``universes_per_round=None`` means ceil(8 ln n), at least 1.
    ``polish`` keeps deleting past the size target until no single edge
    is deletable, so the output is a minimal preserver.
    """

    universes_per_round: int | None = None
    max_resamples_per_round: int = 20
    seed: int = 0
    target_factor: Fraction = Fraction(2)
    bound: str = "auto"  # auto | sv | pairwise
    bound_constant: Fraction = Fraction(1)
    polish: bool = True

    def __post_init__(self) -> None:
        if self.universes_per_round is not None and self.universes_per_round < 1:
            raise ValueError("universes_per_round must be >= 1")
        if Fraction(self.target_factor) <= 1:
            raise ValueError("target_factor must exceed 1")
        if self.bound not in ("auto", "sv", "pairwise"):
            raise ValueError(f"unknown bound mode {self.bound!r}")
        if self.max_resamples_per_round < 0:
            raise ValueError("max_resamples_per_round must be >= 0")

    def universes_for(self, n: int) -> int:
        if self.universes_per_round is not None:
            return self.universes_per_round
        return max(1, math.ceil(8 * math.log(n))) if n > 1 else 1


@dataclass(frozen=True)
class PreserverResult:
    kept_edges: frozenset[int]
    rounds: int
    resample_retries: int
    universes: int
    work_scanned: int
    bound_used: BoundSpec
    seed: int
    condensed_kept: int = 0
    bound_phase_kept: int = 0
    fallback_scans: int = 0
    condensed_nodes: int = 0
    condensed_edges: int = 0
    skeleton_size: int = 0
    stats: dict = field(default_factory=dict, compare=False)


# ---- the multi-universe deletion loop ---------------------------------------

class _Universe:
    __slots__ = ("structs", "targets", "txns", "candidate")

    def __init__(self, structs: list[DecrementalReach], targets: list[set[int]]) -> None:
        self.structs = structs
        self.targets = targets
        self.txns: list[int] | None = None
        self.candidate = -1

    def attempt(self, e: int) -> Iterator[None]:
        """Speculatively delete ``e``; generator result is success."""
        self.candidate = e
        structs = self.structs
        self.txns = [d.begin() for d in structs]
        dirty = [i for i, d in enumerate(structs) if d.kill(e)]
        if not dirty:
            return True
        yield
        for i in dirty:
            tg = self.targets[i]
            for x in structs[i].cascade(e):
                if x is not None and x in tg:
                    return False
                yield
        return True

    def rewind(self) -> None:
        if self.txns is None:
            return
        for d, txn in zip(reversed(self.structs), reversed(self.txns)):
            d.undo(txn)
        self.txns = None

    def keep(self) -> None:
        for d, txn in zip(reversed(self.structs), reversed(self.txns)):
            d.commit(txn)
        self.txns = None

    def replay(self, e: int) -> None:
        for d in self.structs:
            d.apply(e)

    def work(self) -> int:
        return sum(d.work for d in self.structs)


class _Pool:
    """Alive, not-yet-pinned edges with O(1) removal."""

    def __init__(self, items: Iterable[int]) -> None:
        self.items = list(items)
        self.pos = {e: i for i, e in enumerate(self.items)}

    def __len__(self) -> int:
        return len(self.items)

    def remove(self, e: int) -> None:
        i = self.pos.pop(e, None)
        if i is None:
            return
        last = self.items.pop()
        if i < len(self.items):
            self.items[i] = last
            self.pos[last] = i


def _choose_bound(cfg: AlgoConfig, d: DemandSet) -> str:
    if cfg.bound == "sv":
        return "source-restricted"
    if cfg.bound == "pairwise":
        return "pairwise"
    return "source-restricted" if d.sources is not None else "pairwise"


class _Shrinker:
    def __init__(self, dag: DirectedGraph, demands: DemandSet, universes: int, cfg: AlgoConfig) -> None:
        self.dag = dag
        self.cfg = cfg
        order = topological_order(dag)
        groups = demands.by_source()
        protos: list[DecrementalReach] = []
        targets: list[set[int]] = []
        for s, ts in groups.items():
            d = DecrementalReach(dag, s, order=order)
            live = {t for t in ts if d.reachable[t]}
            if live:
                protos.append(d)
                targets.append(live)
        self.init_work = sum(d.work for d in protos)
        self.universes = [
            _Universe([d.clone() for d in protos], targets) for _ in range(universes)
        ]
        for u in self.universes:
            for d in u.structs:
                d.work = 0
        self.alive = bytearray(b"\x01") * dag.edge_count
        self.alive_count = dag.edge_count
        self.pool = _Pool(range(dag.edge_count))
        self.rounds = 0
        self.retries = 0
        self.fallback_scans = 0
        self._round_no = 0

    def _commit(self, winner: _Universe, e: int) -> None:
        winner.keep()
        for u in self.universes:
            if u is not winner:
                u.replay(e)
        self.alive[e] = 0
        self.alive_count -= 1
        self.pool.remove(e)
        self.rounds += 1

    def _round(self) -> bool:
        """One sampling round.  Returns True if an edge was deleted."""
        rng = stream(self.cfg.seed, "preserver-round", self._round_no)
        self._round_no += 1
        items = self.pool.items
        k = min(len(self.universes), len(items))
        used: set[int] = set()
        cands = []
        for _ in range(k):
            j = rng.randrange(len(items))
            while j in used:
                j = rng.randrange(len(items))
            used.add(j)
            cands.append(items[j])
        running: list[tuple[_Universe, Iterator[None]]] = []
        failed: list[_Universe] = []
        winner = None
        for u, e in zip(self.universes, cands):
            running.append((u, u.attempt(e)))
        # round-robin: every live universe takes one step per turn
        while running and winner is None:
            still = []
            for u, gen in running:
                try:
                    next(gen)
                except StopIteration as stop:
                    if stop.value:
                        winner = u
                        break
                    failed.append(u)
                    continue
                still.append((u, gen))
            running = still
        for u in self.universes[:k]:
            if u is not winner:
                u.rewind()
        for u in failed:
            self.pool.remove(u.candidate)
        if winner is None:
            self.retries += 1
            return False
        self._commit(winner, winner.candidate)
        return True

    def _scan(self) -> bool:
        """Deterministic fallback: first deletable edge in id order."""
        self.fallback_scans += 1
        first = self.universes[0]
        for e in sorted(self.pool.items):
            gen = first.attempt(e)
            try:
                while True:
                    next(gen)
            except StopIteration as stop:
                ok = stop.value
            if ok:
                self._commit(first, e)
                return True
            first.rewind()
            self.pool.remove(e)
        return False

    def run(self, limit: int | None) -> None:
        """Delete until at most ``limit`` edges remain (None: until minimal)."""
        misses = 0
        while self.pool.items and (limit is None or self.alive_count > limit):
            if self._round():
                misses = 0
                continue
            misses += 1
            if misses >= self.cfg.max_resamples_per_round and self.pool.items:
                misses = 0
                if not self._scan():
                    break

    def work(self) -> int:
        return self.init_work + sum(u.work() for u in self.universes)


def build_preserver(g: DirectedGraph, d: DemandSet, cfg: AlgoConfig | None = None) -> PreserverResult:
    """Reachability preserver of ``g`` for ``d`` (any digraph)."""
    cfg = cfg or AlgoConfig()
    d.check_range(g.node_count)
    cond, dm = condense(g, d)
    dag = cond.dag
    kind = _choose_bound(cfg, dm)
    bound = BoundSpec.compute(
        kind, dag.node_count, len(dm.pairs), dm.source_count(), cfg.bound_constant, cap=dag.edge_count
    )
    universes = cfg.universes_for(g.node_count)
    shrink = _Shrinker(dag, dm, universes, cfg)
    target = math.floor(Fraction(cfg.target_factor) * bound.f)
    shrink.run(target)
    bound_phase_kept = shrink.alive_count
    if cfg.polish:
        shrink.run(None)
    condensed = [e for e in range(dag.edge_count) if shrink.alive[e]]
    kept = expand_preserver(cond, condensed)
    if cfg.polish and cond.skeleton_edges:
        kept = _prune_skeleton(g, d, kept, cond.skeleton_edges)
    log.info(
        "preserver: n=%d m=%d -> condensed n'=%d m'=%d, kept %d (bound f=%d, rounds %d, retries %d)",
        g.node_count, g.edge_count, dag.node_count, dag.edge_count, len(kept), bound.f,
        shrink.rounds, shrink.retries,
    )
    return PreserverResult(
        kept_edges=frozenset(kept),
        rounds=shrink.rounds,
        resample_retries=shrink.retries,
        universes=universes,
        work_scanned=shrink.work(),
        bound_used=bound,
        seed=cfg.seed,
        condensed_kept=len(condensed),
        bound_phase_kept=bound_phase_kept,
        fallback_scans=shrink.fallback_scans,
        condensed_nodes=dag.node_count,
        condensed_edges=dag.edge_count,
        skeleton_size=len(cond.skeleton_edges),
    )


def _prune_skeleton(g: DirectedGraph, d: DemandSet, kept: set[int], skeleton: Iterable[int]) -> set[int]:
    """Drop skeleton edges no demand needs (e.g. SCCs off every demand path).

    Condensed edges stay: each one was already needed, and removing
    intra-SCC edges only makes that worse.
    """
    ids = sorted(kept)
    local = {e: i for i, e in enumerate(ids)}
    sub = DirectedGraph(g.node_count, [g.edges[e] for e in ids])
    order = [local[e] for e in sorted(skeleton)]
    return {ids[i] for i in greedy_prune(sub, d, order)}


# ---- baselines --------------------------------------------------------------

def _live_demands(g: DirectedGraph, d: DemandSet) -> dict[int, set[int]]:
    live: dict[int, set[int]] = {}
    for s, ts in d.by_source().items():
        reach = reachable_set(g, s)
        hit = {t for t in ts if t in reach}
        if hit:
            live[s] = hit
    return live


def _bfs_tree(g: DirectedGraph, s: int, mask: bytearray) -> tuple[set[int], set[int]]:
    seen = {s}
    tree: set[int] = set()
    stack = [s]
    heads, out_adj = g.heads, g.out_adj
    while stack:
        u = stack.pop()
        for e in out_adj[u]:
            if mask[e]:
                v = heads[e]
                if v not in seen:
                    seen.add(v)
                    tree.add(e)
                    stack.append(v)
    return seen, tree


def greedy_prune(g: DirectedGraph, d: DemandSet, order: Iterable[int] | None = None) -> set[int]:
    """Single deterministic pass: drop each edge if every demand survives.

    One pass suffices for minimality because an edge that is needed stays
    needed as the graph shrinks.
    """
    live = _live_demands(g, d)
    mask = bytearray(b"\x01") * g.edge_count
    trees = {}
    for s in live:
        trees[s] = _bfs_tree(g, s, mask)[1]
    for e in (range(g.edge_count) if order is None else order):
        touched = [s for s in live if e in trees[s]]
        mask[e] = 0
        fresh = {}
        ok = True
        for s in touched:
            reach, tree = _bfs_tree(g, s, mask)
            if not live[s] <= reach:
                ok = False
                break
            fresh[s] = tree
        if ok:
            trees.update(fresh)
        else:
            mask[e] = 1
    return {e for e in range(g.edge_count) if mask[e]}


def _relevant_edges(g: DirectedGraph, live: dict[int, set[int]]) -> list[int]:
    """Edges lying on some s->t walk of a live demand."""
    fwd = {s: reachable_set(g, s) for s in live}
    back: dict[int, set[int]] = {}
    for ts in live.values():
        for t in ts:
            if t not in back:
                back[t] = coreachable_set(g, t)
    out = []
    for e, (u, v) in enumerate(g.edges):
        if any(u in fwd[s] and any(v in back[t] for t in ts) for s, ts in live.items()):
            out.append(e)
    return out


def _feasible_bits(n: int, edges: list[tuple[int, int]], live_bits: list[tuple[int, int]]) -> bool:
    adj = [0] * n
    for u, v in edges:
        adj[u] |= 1 << v
    for s, want in live_bits:
        seen = 1 << s
        frontier = seen
        while frontier:
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= adj[low.bit_length() - 1]
                f ^= low
            frontier = nxt & ~seen
            seen |= frontier
            if want & ~seen == 0:
                break
        if want & ~seen:
            return False
    return True


def min_feasible_subset(g: DirectedGraph, live: dict[int, set[int]]) -> set[int]:
    """Fewest edges keeping every live demand reachable, by increasing-size search."""
    relevant = _relevant_edges(g, live)
    live_bits = [(s, sum(1 << t for t in ts)) for s, ts in live.items()]
    pairs = [g.edges[e] for e in relevant]
    forced = []
    optional = []
    for i, e in enumerate(relevant):
        others = pairs[:i] + pairs[i + 1:]
        if _feasible_bits(g.node_count, others, live_bits):
            optional.append(e)
        else:
            forced.append(e)
    base = [g.edges[e] for e in forced]
    for extra in range(len(optional) + 1):
        for combo in combinations(optional, extra):
            if _feasible_bits(g.node_count, base + [g.edges[e] for e in combo], live_bits):
                return set(forced) | set(combo)
    raise AssertionError("full relevant edge set must be feasible")


def brute_force_opt(g: DirectedGraph, d: DemandSet, budget: int = 22) -> set[int]:
    """Exact minimum reachability preserver (tiny graphs only)."""
    if g.edge_count > budget:
        raise BudgetExceeded(f"{g.edge_count} edges exceeds brute-force budget {budget}")
    live = _live_demands(g, d)
    if not live:
        return set()
    return min_feasible_subset(g, live)
