"""Decremental single-source reachability on a DAG, with undo.

Every non-source node keeps a *hook*: one alive in-edge whose tail is
reachable.  When a hook dies the node scans its in-edge list forward from
its cursor.  Edges behind a cursor are dead or have an unreachable tail,
and without undo both conditions are permanent, so over any deletion
sequence each in-edge is passed at most once: total cursor advances are
bounded by the edge count (``work`` counts them).

Mutations are journaled while a transaction is open, and ``undo`` replays
the journal backwards.  Transactions nest LIFO.
"""
from __future__ import annotations

from array import array
from collections import deque
from typing import Iterator

from .graph import ContractViolation, DirectedGraph, topological_order

# journal opcodes
_KILL = 0
_CURSOR = 1
_UNREACH = 2


class DecrementalReach:
    """Reachable set of ``source`` in ``g`` under edge deletions."""

    __slots__ = (
        "graph", "source", "hook", "cursor", "alive", "reachable",
        "work", "_journal", "_marks", "_next_txn",
    )

    def __init__(self, g: DirectedGraph, source: int, *, order: list[int] | None = None) -> None:
        if not 0 <= source < g.node_count:
            raise ContractViolation(f"source {source} out of range")
        if order is None:
            order = topological_order(g)
            if order is None:
                raise ContractViolation("decremental reachability needs an acyclic graph")
        self.graph = g
        self.source = source
        n = g.node_count
        self.hook = array("l", [-1]) * n
        self.cursor = array("l", [0]) * n
        self.alive = bytearray(b"\x01") * g.edge_count
        self.reachable = bytearray(n)
        self.reachable[source] = 1
        self.work = 0
        self._journal: list[tuple] = []
        self._marks: list[tuple[int, int]] = []
        self._next_txn = 0

        tails, in_adj = g.tails, g.in_adj
        reachable, hook, cursor = self.reachable, self.hook, self.cursor
        started = False
        for v in order:
            if v == source:
                started = True
                continue
            if not started:
                # nothing before the source in topological order is reachable
                cursor[v] = len(in_adj[v])
                self.work += cursor[v]
                continue
            ins = in_adj[v]
            i = 0
            while i < len(ins) and not reachable[tails[ins[i]]]:
                i += 1
            cursor[v] = i
            self.work += i
            if i < len(ins):
                hook[v] = ins[i]
                reachable[v] = 1

    def clone(self) -> DecrementalReach:
        """An identical, independent copy with an empty journal."""
        twin = object.__new__(DecrementalReach)
        twin.graph = self.graph
        twin.source = self.source
        twin.hook = array("l", self.hook)
        twin.cursor = array("l", self.cursor)
        twin.alive = bytearray(self.alive)
        twin.reachable = bytearray(self.reachable)
        twin.work = self.work
        twin._journal = []
        twin._marks = []
        twin._next_txn = 0
        return twin

    # ---- queries ------------------------------------------------------------

    def is_reachable(self, v: int) -> bool:
        return bool(self.reachable[v])

    def reachable_nodes(self) -> set[int]:
        return {v for v, flag in enumerate(self.reachable) if flag}

    def dump(self) -> str:
        """Deterministic text image of hooks, cursors and flags."""
        return "\n".join((
            f"source {self.source}",
            "hook " + " ".join(map(str, self.hook)),
            "cursor " + " ".join(map(str, self.cursor)),
            "reachable " + self.reachable.hex(),
            "alive " + self.alive.hex(),
        ))

    def snapshot(self) -> bytes:
        """Compact binary image of the same fields as ``dump``."""
        return b"".join((
            self.hook.tobytes(), self.cursor.tobytes(), bytes(self.reachable), bytes(self.alive),
        ))

    # ---- transactions -------------------------------------------------------

    @property
    def in_transaction(self) -> bool:
        return bool(self._marks)

    def begin(self) -> int:
        token = self._next_txn
        self._next_txn += 1
        self._marks.append((token, len(self._journal)))
        return token

    def undo(self, txn: int) -> None:
        if not self._marks or self._marks[-1][0] != txn:
            raise ContractViolation(f"transaction {txn} is not the most recent open one")
        _, start = self._marks.pop()
        journal = self._journal
        alive, cursor, hook, reachable = self.alive, self.cursor, self.hook, self.reachable
        while len(journal) > start:
            entry = journal.pop()
            op = entry[0]
            if op == _KILL:
                alive[entry[1]] = 1
            elif op == _CURSOR:
                _, v, old_cursor, old_hook = entry
                cursor[v] = old_cursor
                hook[v] = old_hook
            else:
                reachable[entry[1]] = 1

    def commit(self, txn: int) -> None:
        """Close ``txn`` keeping its effects."""
        if not self._marks or self._marks[-1][0] != txn:
            raise ContractViolation(f"transaction {txn} is not the most recent open one")
        _, start = self._marks.pop()
        if not self._marks:
            del self._journal[start:]

    # ---- deletion -----------------------------------------------------------

    def kill(self, e: int) -> bool:
        """Mark ``e`` dead.  True if it was the hook of a reachable node,
        in which case ``cascade()`` must run before the state is consistent."""
        if not self.alive[e]:
            raise ContractViolation(f"edge {e} is already dead")
        self.alive[e] = 0
        if self._marks:
            self._journal.append((_KILL, e))
        v = self.graph.heads[e]
        return self.hook[v] == e and self.reachable[v] == 1

    def cascade(self, e: int) -> Iterator[int | None]:
        """Repair after ``kill(e)`` returned True.

        Yields once per processed node: the node id if it just became
        unreachable, else None.  FIFO worklist.
        """
        g = self.graph
        tails, heads, in_adj, out_adj = g.tails, g.heads, g.in_adj, g.out_adj
        alive, cursor, hook, reachable = self.alive, self.cursor, self.hook, self.reachable
        journal = self._journal if self._marks else None
        queue = deque([heads[e]])
        while queue:
            x = queue.popleft()
            h = hook[x]
            if not reachable[x] or (alive[h] and reachable[tails[h]]):
                yield None
                continue
            ins = in_adj[x]
            start = cursor[x]
            i = start + 1
            end = len(ins)
            while i < end:
                f = ins[i]
                if alive[f] and reachable[tails[f]]:
                    break
                i += 1
            self.work += i - start
            if journal is not None:
                journal.append((_CURSOR, x, start, h))
            cursor[x] = i
            if i < end:
                hook[x] = ins[i]
                yield None
                continue
            hook[x] = -1
            reachable[x] = 0
            if journal is not None:
                journal.append((_UNREACH, x))
            for f in out_adj[x]:
                y = heads[f]
                if hook[y] == f and reachable[y]:
                    queue.append(y)
            yield x

    def delete_edge(self, e: int) -> tuple[list[int], int]:
        """Delete ``e``; returns (nodes that became unreachable, transaction)."""
        txn = self.begin()
        flipped = []
        if self.kill(e):
            flipped = [x for x in self.cascade(e) if x is not None]
        return flipped, txn

    def apply(self, e: int) -> list[int]:
        """Delete ``e`` with no new transaction (journaled only if one is open)."""
        if self.kill(e):
            return [x for x in self.cascade(e) if x is not None]
        return []
