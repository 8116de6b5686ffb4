"""Greedy table synthesis by constrained graph partitioning.

The graph is first split into connected components with Hash-to-Min label
propagation; each component is then partitioned by repeatedly merging the
two parts with the largest summed positive weight, as long as the merged
pair carries no negative edge below ``tau``.
"""
from __future__ import annotations

import heapq
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .compat import CompatibilityGraph
from .parallel import pmap


class DisjointSet:
    """Union-by-size with path compression."""

    def __init__(self, items: Iterable = ()):
        self.parent: dict = {}
        self.size: dict = {}
        for x in items:
            self.add(x)

    def add(self, x):
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra

    def groups(self) -> list[list]:
        out: dict = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return [sorted(g) for g in out.values()]


def hash_to_min(vertices: Sequence, adjacency: dict) -> dict:
    """Connected-component labels (the minimum vertex) by Hash-to-Min.

    Every vertex starts with the cluster {v} | neighbours(v). In each round
    a vertex sends its whole cluster to the cluster minimum and the minimum
    to every other member; the new cluster is the union of what it received.
    Runs to a fixpoint, after which each vertex's cluster minimum is its
    component's smallest vertex.
    """
    clusters = {v: frozenset({v, *adjacency.get(v, ())}) for v in vertices}
    while True:
        inbox: dict = {v: set() for v in vertices}
        for v, c in clusters.items():
            m = min(c)
            inbox[m].update(c)
            for u in c:
                inbox[u].add(m)
        new = {v: frozenset(s) for v, s in inbox.items()}
        if new == clusters:
            break
        clusters = new
    return {v: min(c) for v, c in clusters.items()}


def _adjacency(g: CompatibilityGraph) -> dict:
    adj: dict = {v: set() for v in g.vertices}
    for a, b in itertools.chain(g.pos, g.neg):
        adj[a].add(b)
        adj[b].add(a)
    return adj


def connected_components(g: CompatibilityGraph) -> list[CompatibilityGraph]:
    """Components over positive and negative edges, ordered by smallest vertex."""
    labels = hash_to_min(g.vertices, _adjacency(g))
    members: dict = {}
    for v in g.vertices:
        members.setdefault(labels[v], []).append(v)
    pos: dict = {root: {} for root in members}
    neg: dict = {root: {} for root in members}
    for k, w in g.pos.items():
        pos[labels[k[0]]][k] = w
    for k, w in g.neg.items():
        neg[labels[k[0]]][k] = w
    return [CompatibilityGraph(tuple(members[r]), pos[r], neg[r]) for r in sorted(members)]


@dataclass
class Partitioning:
    parts: list[tuple[str, ...]]
    weights: list[float] = field(default_factory=list)
    merges: list[tuple[tuple[str, ...], tuple[str, ...], float]] = field(default_factory=list)

    def __post_init__(self):
        self.parts = [tuple(sorted(part)) for part in self.parts]
        order = sorted(range(len(self.parts)), key=lambda k: self.parts[k])
        self.parts = [self.parts[k] for k in order]
        if self.weights:
            self.weights = [self.weights[k] for k in order]

    def as_sets(self) -> set[frozenset]:
        return {frozenset(p) for p in self.parts}

    def membership(self) -> dict[str, int]:
        return {v: k for k, part in enumerate(self.parts) for v in part}


def objective(p: Partitioning, g: CompatibilityGraph) -> float:
    """Sum of intra-part positive weights of the original graph."""
    known = set(g.vertices)
    where = {}
    for k, part in enumerate(p.parts):
        for v in part:
            if v not in known:
                raise ValueError(f"partition references unknown vertex {v!r}")
            where[v] = k
    return sum(w for (a, b), w in sorted(g.pos.items()) if where.get(a, -1) == where.get(b, -2))


def is_feasible(p: Partitioning, g: CompatibilityGraph, tau: float) -> bool:
    where = p.membership()
    return not any(w < tau and where[a] == where[b] for (a, b), w in g.neg.items())


def greedy_partition(g: CompatibilityGraph, tau: float = -0.2) -> Partitioning:
    """Merge the most compatible eligible pair of parts until none remains.

    A pair is eligible when its aggregated negative weight (minimum over the
    original cross edges) is at least ``tau`` and its aggregated positive
    weight (sum over cross edges) is positive. Ties on weight go to the
    pair whose smallest member ids compare lowest.
    """
    ds = DisjointSet(g.vertices)
    # per-root aggregated cross weights: wpos sums, wneg takes the minimum
    wpos: dict = {v: {} for v in g.vertices}
    wneg: dict = {v: {} for v in g.vertices}
    inner = {v: 0.0 for v in g.vertices}
    label = {v: v for v in g.vertices}  # smallest member id of each root's part
    members = {v: [v] for v in g.vertices}
    for (a, b), w in g.pos.items():
        wpos[a][b] = wpos[b][a] = w
    for (a, b), w in g.neg.items():
        wneg[a][b] = wneg[b][a] = w
    version = {v: 0 for v in g.vertices}
    heap: list = []

    def push(x, y):
        w = wpos[x].get(y, 0.0)
        if w <= 0 or wneg[x].get(y, 0.0) < tau:
            return
        lx, ly = sorted((label[x], label[y]))
        heapq.heappush(heap, (-w, lx, ly, x, y, version[x], version[y]))

    for a, b in sorted(g.pos):
        push(a, b)
    merges = []
    while heap:
        negw, _, _, x, y, vx, vy = heapq.heappop(heap)
        if version.get(x) != vx or version.get(y) != vy:
            continue
        root = ds.union(x, y)
        other = y if root == x else x
        merges.append((tuple(sorted(members[x])), tuple(sorted(members[y])), -negw))
        members[root] = members.pop(x) + members.pop(y)
        inner[root] = inner[x] + inner[y] - negw
        label[root] = min(label[x], label[y])
        nbrs = (set(wpos[x]) | set(wpos[y]) | set(wneg[x]) | set(wneg[y])) - {x, y}
        new_pos, new_neg = {}, {}
        for z in nbrs:
            p = wpos[x].get(z, 0.0) + wpos[y].get(z, 0.0)
            n = min(wneg[x].get(z, 0.0), wneg[y].get(z, 0.0))
            for t in (x, y):
                wpos[z].pop(t, None)
                wneg[z].pop(t, None)
            if p:
                new_pos[z] = p
                wpos[z][root] = p
            if n:
                new_neg[z] = n
                wneg[z][root] = n
        wpos[root], wneg[root] = new_pos, new_neg
        del wpos[other], wneg[other], version[other], inner[other]
        version[root] += 1
        for z in sorted(new_pos, key=lambda z: label[z]):
            push(root, z)
    groups: dict = {}
    for v in g.vertices:
        groups.setdefault(ds.find(v), []).append(v)
    parts = [tuple(sorted(vs)) for vs in groups.values()]
    weights = [inner[r] for r in groups]
    return Partitioning(parts, weights, merges)


def exact_partition(g: CompatibilityGraph, tau: float = -0.2, max_vertices: int = 10) -> Partitioning:
    """Optimal feasible partitioning by exhaustive set-partition enumeration.

    Ties on the objective prefer fewer parts, then the lexicographically
    smallest sorted part list.
    """
    verts = list(g.vertices)
    n = len(verts)
    if n > max_vertices:
        raise ValueError(f"exact_partition refuses graphs with more than {max_vertices} vertices")
    pos = {(verts.index(a), verts.index(b)): w for (a, b), w in g.pos.items()}
    bad = {(verts.index(a), verts.index(b)) for (a, b), w in g.neg.items() if w < tau}
    pw = [[0.0] * n for _ in range(n)]
    conflict = [[False] * n for _ in range(n)]
    for (i, j), w in pos.items():
        pw[i][j] = pw[j][i] = w
    for i, j in bad:
        conflict[i][j] = conflict[j][i] = True

    best = [None]

    def key_of(blocks, score):
        parts = sorted(tuple(sorted(verts[i] for i in b)) for b in blocks)
        return (-round(score, 12), len(parts), parts)

    def rec(i, blocks, score):
        if i == n:
            k = key_of(blocks, score)
            if best[0] is None or k < best[0]:
                best[0] = k
            return
        for b in blocks:
            if any(conflict[i][j] for j in b):
                continue
            gain = sum(pw[i][j] for j in b)
            b.append(i)
            rec(i + 1, blocks, score + gain)
            b.pop()
        blocks.append([i])
        rec(i + 1, blocks, score)
        blocks.pop()

    rec(0, [], 0.0)
    parts = best[0][2] if best[0] else []
    p = Partitioning([tuple(x) for x in parts])
    p.weights = [objective(Partitioning([x]), g.subgraph(x)) for x in p.parts]
    return p


def _greedy_job(args):
    g, tau = args
    return greedy_partition(g, tau)


def partition_graph(g: CompatibilityGraph, tau: float = -0.2, workers: int = 1) -> tuple[Partitioning, dict]:
    """Greedy partitioning of every connected component, concatenated."""
    comps = connected_components(g)
    results = pmap(_greedy_job, [(c, tau) for c in comps], workers)
    parts, weights = [], []
    for r in results:
        parts.extend(r.parts)
        weights.extend(r.weights)
    sizes: dict[int, int] = {}
    for c in comps:
        sizes[len(c.vertices)] = sizes.get(len(c.vertices), 0) + 1
    info = {
        "components": len(comps),
        "component_sizes": {str(k): v for k, v in sorted(sizes.items())},
        "objective": sum(weights),
    }
    return Partitioning(parts, weights), info


def write_partitions(p: Partitioning, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for k, part in enumerate(p.parts):
            fh.write(json.dumps({"partition_id": f"p{k:06d}", "members": list(part)},
                                ensure_ascii=False) + "\n")


def read_partitions(path) -> list[tuple[str, list[str]]]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                out.append((obj["partition_id"], list(obj["members"])))
    return out
