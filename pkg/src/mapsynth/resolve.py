"""Conflict resolution inside a synthesized partition.

Tables of one partition are unioned; tables that assert value pairs
contradicting other tables are removed until no two retained tables
conflict.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Sequence

from .compat import _Side, table_index
from .extract import CandidateTable, Pair
from .strmatch import EMPTY_SYNONYMS, MatchConfig, SynonymStore


@dataclass
class ResolvedPartition:
    kept: list[CandidateTable]
    removed: list[tuple[CandidateTable, str]] = field(default_factory=list)
    partition_id: str = ""

    @property
    def merged_pairs(self) -> set[Pair]:
        return merged_pairs(self)


def merged_pairs(resolved: ResolvedPartition) -> set[Pair]:
    """Exact-value union of the kept tables' pairs."""
    out: set[Pair] = set()
    for t in resolved.kept:
        out.update(t.pairs)
    return out


class _ConflictIndex:
    """Conflicts between the distinct value pairs of a partition.

    Two pairs conflict when their left values are equivalent and their right
    values are not.
    """

    def __init__(self, tables: Sequence[CandidateTable], cfg: MatchConfig, syn: SynonymStore):
        pairs = sorted({p for t in tables for p in t.pairs})
        self.pairs = pairs
        self.pid = {p: k for k, p in enumerate(pairs)}
        merged = CandidateTable("_merged", tuple(pairs))
        side = _Side(merged, table_index([merged], cfg, syn))
        eq = side.index.equivalent
        self.conf: list[list[int]] = [[] for _ in pairs]
        left_equiv: dict[str, list[str]] = {}
        for k, (l, r) in enumerate(pairs):
            lefts = left_equiv.get(l)
            if lefts is None:
                lefts = left_equiv[l] = side.equivalent_lefts(l)
            for l2 in lefts:
                for r2 in side.by_left[l2]:
                    if not eq(r, r2):
                        self.conf[k].append(self.pid[(l2, r2)])

    def table_conflicts(self, a: CandidateTable, b: CandidateTable) -> bool:
        bset = {self.pid[p] for p in b.pairs}
        return any(q in bset for p in a.pairs for q in self.conf[self.pid[p]])


def _table_conflict_graph(tables, index: _ConflictIndex) -> list[set[int]]:
    n = len(tables)
    holders: dict[int, set[int]] = {}
    for i, t in enumerate(tables):
        for p in t.pairs:
            holders.setdefault(index.pid[p], set()).add(i)
    adj = [set() for _ in range(n)]
    for i, t in enumerate(tables):
        for p in t.pairs:
            for q in index.conf[index.pid[p]]:
                for j in holders.get(q, ()):
                    if j != i:
                        adj[i].add(j)
                        adj[j].add(i)
    return adj


def resolve_conflicts(partition: Sequence[CandidateTable], cfg: MatchConfig = MatchConfig(),
                      synonyms: SynonymStore = EMPTY_SYNONYMS, partition_id: str = "") -> ResolvedPartition:
    """Drop tables holding the most-contested value pairs until conflict-free.

    Every value pair is scored by how many conflicting pair occurrences the
    other retained tables hold; a table scores the maximum over its pairs.
    The top-scoring table is removed (ties: fewer pairs, then larger id) and
    scores are updated, until no two retained tables conflict.
    """
    tables = sorted(partition, key=lambda t: t.id)
    n = len(tables)
    if n < 2:
        return ResolvedPartition(list(tables), [], partition_id)
    index = _ConflictIndex(tables, cfg, synonyms)
    pids = [[index.pid[p] for p in t.pairs] for t in tables]
    holders: dict[int, set[int]] = {}
    for i, ps in enumerate(pids):
        for q in ps:
            holders.setdefault(q, set()).add(i)
    alive = [True] * n

    def pair_count(p: int) -> int:
        # occurrences of conflicting pairs in tables other than a sole holder of p
        hp = holders.get(p, set())
        if not hp:
            return 0
        total = 0
        for q in index.conf[p]:
            hq = holders.get(q, ())
            total += len(hq)
            if len(hp) == 1:
                total -= len(hp & hq) if hq else 0
        return total

    pcount: dict[int, int] = {}
    for ps in pids:
        for p in ps:
            if p not in pcount:
                pcount[p] = pair_count(p)

    def table_score(i):
        return max((pcount[p] for p in pids[i]), default=0)

    version = [0] * n
    heap = []
    for i in range(n):
        s = table_score(i)
        if s > 0:
            heapq.heappush(heap, (-s, len(tables[i]), -i, version[i], i))
    removed = []
    while heap:
        negs, _, _, ver, i = heapq.heappop(heap)
        if not alive[i] or ver != version[i]:
            continue
        alive[i] = False
        removed.append((tables[i], f"max pair conflict count {-negs}"))
        touched = set()
        for p in pids[i]:
            holders[p].discard(i)
            touched.add(p)
            touched.update(index.conf[p])
        dirty = set()
        for p in touched:
            if p in pcount:
                new = pair_count(p)
                if new != pcount[p]:
                    pcount[p] = new
                    dirty.update(holders.get(p, ()))
        for j in dirty:
            if alive[j]:
                version[j] += 1
                s = table_score(j)
                if s > 0:
                    heapq.heappush(heap, (-s, len(tables[j]), -j, version[j], j))
    kept = [t for t, a in zip(tables, alive) if a]
    return ResolvedPartition(kept, removed, partition_id)


def is_conflict_free(resolved: ResolvedPartition, cfg: MatchConfig = MatchConfig(),
                     synonyms: SynonymStore = EMPTY_SYNONYMS) -> bool:
    kept = resolved.kept
    if len(kept) < 2:
        return True
    index = _ConflictIndex(kept, cfg, synonyms)
    return not any(_table_conflict_graph(kept, index))


def exact_resolve(partition: Sequence[CandidateTable], cfg: MatchConfig = MatchConfig(),
                  synonyms: SynonymStore = EMPTY_SYNONYMS, max_tables: int = 15,
                  partition_id: str = "") -> ResolvedPartition:
    """Conflict-free subset covering the most distinct value pairs.

    Branch and bound over tables: including a table excludes its conflict
    neighbours, and a branch is cut when even keeping every remaining
    candidate cannot beat the best coverage found. Ties prefer more kept
    tables, then the lexicographically smallest kept-id list.
    """
    tables = sorted(partition, key=lambda t: t.id)
    n = len(tables)
    if n > max_tables:
        raise ValueError(f"exact_resolve refuses partitions with more than {max_tables} tables")
    if n == 0:
        return ResolvedPartition([], [], partition_id)
    index = _ConflictIndex(tables, cfg, synonyms)
    adj = _table_conflict_graph(tables, index)
    sets = [frozenset(t.pairs) for t in tables]
    best = [None]

    def key(chosen, cover):
        return (-cover, -len(chosen), [tables[i].id for i in chosen])

    def rec(i, chosen, covered, banned):
        if i == n:
            k = key(chosen, len(covered))
            if best[0] is None or k < best[0][0]:
                best[0] = (k, list(chosen))
            return
        if best[0] is not None:
            bound = set(covered)
            for j in range(i, n):
                if j not in banned:
                    bound |= sets[j]
            if len(bound) < -best[0][0][0]:
                return
        if i not in banned:
            chosen.append(i)
            rec(i + 1, chosen, covered | sets[i], banned | adj[i])
            chosen.pop()
        rec(i + 1, chosen, covered, banned)

    rec(0, [], frozenset(), frozenset())
    keep = set(best[0][1])
    kept = [tables[i] for i in sorted(keep)]
    removed = [(tables[i], "excluded by exact optimum") for i in range(n) if i not in keep]
    return ResolvedPartition(kept, removed, partition_id)


def resolve_brute_force(partition: Sequence[CandidateTable], cfg: MatchConfig = MatchConfig(),
                        synonyms: SynonymStore = EMPTY_SYNONYMS) -> int:
    """Best coverage over every subset, no pruning. Small inputs only."""
    tables = sorted(partition, key=lambda t: t.id)
    n = len(tables)
    if n == 0:
        return 0
    index = _ConflictIndex(tables, cfg, synonyms)
    adj = _table_conflict_graph(tables, index)
    best = 0
    for mask in range(1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        if any(j in adj[i] for i in members for j in members):
            continue
        best = max(best, len({p for i in members for p in tables[i].pairs}))
    return best
