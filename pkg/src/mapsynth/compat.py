"""Compatibility graph over candidate tables.

Positive weight is the maximum-of-containment of two pair sets; negative
weight is the (negated) relative size of their conflict set, the left
values the two tables map to different right values. Only table pairs that
share enough exact keys in an inverted index are ever compared.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy import sparse

from .extract import CandidateTable
from .parallel import pmap
from .strmatch import EMPTY_SYNONYMS, MatchConfig, SynonymStore, ValueIndex

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GraphConfig:
    theta_overlap: int = 2
    theta_edge: float = 0.85
    tau: float = -0.2
    bucket_cap: int = 10_000
    use_negative: bool = True

    def __post_init__(self):
        if not self.tau < 0:
            raise ValueError(f"tau must be negative, got {self.tau}")
        if not 0 < self.theta_edge <= 1:
            raise ValueError(f"theta_edge must be in (0, 1], got {self.theta_edge}")
        if self.theta_overlap < 0:
            raise ValueError("theta_overlap must be >= 0")


class _Side:
    """Lookup structures over one candidate's pairs for approximate joins."""

    __slots__ = ("pairs", "pair_set", "by_left", "index", "fuzzy")

    def __init__(self, table: CandidateTable, index: ValueIndex):
        self.pairs = table.pairs
        self.pair_set = table.pair_set
        self.by_left = table.by_left
        self.index = index
        # left values equivalent to something other than themselves
        self.fuzzy = [l for l in self.by_left if len(index.equivalents(l)) > 1]

    def equivalent_lefts(self, value: str) -> list[str]:
        """Left values of this table equivalent to ``value``, sorted."""
        by_left = self.by_left
        eq = self.index.equivalents(value)
        if len(eq) == 1:
            return [value] if value in by_left and value in eq else [l for l in eq if l in by_left]
        return sorted(l for l in eq if l in by_left)


def table_index(tables: Iterable[CandidateTable], cfg: MatchConfig = MatchConfig(),
                synonyms: SynonymStore = EMPTY_SYNONYMS) -> ValueIndex:
    """Equivalence index over every left and right value of ``tables``."""
    return ValueIndex((v for t in tables for p in t.pairs for v in p), cfg, synonyms)


def _canonical(b1: CandidateTable, b2: CandidateTable):
    return (b1, b2) if (len(b1), b1.pairs, b1.id) <= (len(b2), b2.pairs, b2.id) else (b2, b1)


def _greedy_match(a_pairs, b_side: _Side, exclude: frozenset | set) -> int:
    used = set(exclude)
    eq = b_side.index.equivalent
    matched = 0
    for l, r in a_pairs:
        hit = None
        for l2 in b_side.equivalent_lefts(l):
            for r2 in b_side.by_left[l2]:
                q = (l2, r2)
                if q not in used and eq(r, r2):
                    hit = q
                    break
            if hit:
                break
        if hit:
            used.add(hit)
            matched += 1
    return matched


def _intersection(a: CandidateTable, b_side: _Side, need: float | None = None) -> int:
    exact = a.pair_set & b_side.pair_set
    n = len(exact)
    ra = [p for p in a.pairs if p not in exact]
    nb = len(b_side.pairs)
    if not ra or n == nb:
        return n
    if need is not None and n + min(len(ra), nb - n) < need:
        return n
    return n + _greedy_match(ra, b_side, exact)


def pair_intersection(b1: CandidateTable, b2: CandidateTable, cfg: MatchConfig = MatchConfig(),
                      synonyms: SynonymStore = EMPTY_SYNONYMS, index: ValueIndex | None = None) -> int:
    """Size of a greedy one-to-one matching between two pair sets.

    Exact matches are taken first; remaining pairs are matched in sorted order
    when both components are equivalent (approximate match or synonyms).
    """
    a, b = _canonical(b1, b2)
    index = index or table_index((a, b), cfg, synonyms)
    return _intersection(a, _Side(b, index))


def positive_weight(b1: CandidateTable, b2: CandidateTable, cfg: MatchConfig = MatchConfig(),
                    synonyms: SynonymStore = EMPTY_SYNONYMS, index: ValueIndex | None = None) -> float:
    if not len(b1) or not len(b2):
        return 0.0
    k = pair_intersection(b1, b2, cfg, synonyms, index)
    return max(k / len(b1), k / len(b2))


def _conflicts(a: CandidateTable | _Side, b_side: _Side) -> set[str]:
    if not isinstance(a, _Side):
        a = _Side(a, b_side.index)
    eq = b_side.index.equivalent
    a_left, b_left = a.by_left, b_side.by_left
    out = set()
    fuzzy = set(a.fuzzy)
    # values equivalent only to themselves need just an exact lookup
    for l in a_left.keys() & b_left.keys():
        if l in fuzzy:
            continue
        ra, rb = a_left[l], b_left[l]
        if len(ra) == 1 and ra == rb:
            continue
        if any(not eq(r, r2) for r in ra for r2 in rb):
            out.add(l)
    for l in fuzzy:
        rights = a_left[l]
        if any(
            not eq(r, r2)
            for l2 in b_side.equivalent_lefts(l) for r in rights for r2 in b_left[l2]
        ):
            out.add(l)
    return out


def conflict_set(b1: CandidateTable, b2: CandidateTable, cfg: MatchConfig = MatchConfig(),
                 synonyms: SynonymStore = EMPTY_SYNONYMS, index: ValueIndex | None = None) -> set[str]:
    """Left values of ``b1`` that ``b2`` maps to a non-equivalent right value."""
    index = index or table_index((b1, b2), cfg, synonyms)
    return _conflicts(b1, _Side(b2, index))


def negative_weight(b1: CandidateTable, b2: CandidateTable, cfg: MatchConfig = MatchConfig(),
                    synonyms: SynonymStore = EMPTY_SYNONYMS, index: ValueIndex | None = None) -> float:
    if not len(b1) or not len(b2):
        return 0.0
    a, b = _canonical(b1, b2)
    f = len(conflict_set(a, b, cfg, synonyms, index))
    return -max(f / len(a), f / len(b)) if f else 0.0


@dataclass
class CompatibilityGraph:
    vertices: tuple[str, ...]
    pos: dict[tuple[str, str], float] = field(default_factory=dict)
    neg: dict[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = tuple(sorted(self.vertices))
        self.pos = {_key(a, b): w for (a, b), w in self.pos.items()}
        self.neg = {_key(a, b): w for (a, b), w in self.neg.items()}

    def edges(self) -> Iterator[tuple[str, str, float, float]]:
        for a, b in sorted(set(self.pos) | set(self.neg)):
            yield a, b, self.pos.get((a, b), 0.0), self.neg.get((a, b), 0.0)

    def n_edges(self) -> int:
        return len(set(self.pos) | set(self.neg))

    def subgraph(self, members: Iterable[str]) -> "CompatibilityGraph":
        keep = set(members)
        return CompatibilityGraph(
            tuple(keep),
            {k: w for k, w in self.pos.items() if k[0] in keep and k[1] in keep},
            {k: w for k, w in self.neg.items() if k[0] in keep and k[1] in keep},
        )

    def write_jsonl(self, path) -> None:
        """One ``{"v": id}`` line per vertex, then ``{"a","b","wpos","wneg"}`` per edge."""
        with Path(path).open("w", encoding="utf-8") as fh:
            for v in self.vertices:
                fh.write(json.dumps({"v": v}, ensure_ascii=False) + "\n")
            for a, b, wp, wn in self.edges():
                fh.write(json.dumps({"a": a, "b": b, "wpos": wp, "wneg": wn}, ensure_ascii=False) + "\n")

    @classmethod
    def read_jsonl(cls, path) -> "CompatibilityGraph":
        verts, pos, neg = set(), {}, {}
        with Path(path).open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                obj = json.loads(line)
                if "v" in obj:
                    verts.add(obj["v"])
                    continue
                a, b = obj["a"], obj["b"]
                verts.update((a, b))
                if obj.get("wpos"):
                    pos[(a, b)] = float(obj["wpos"])
                if obj.get("wneg"):
                    neg[(a, b)] = float(obj["wneg"])
        return cls(tuple(verts), pos, neg)


def _key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


@dataclass
class GraphReport:
    candidates: int = 0
    pos_pairs_evaluated: int = 0
    neg_pairs_evaluated: int = 0
    skipped_buckets: int = 0
    pos_edges: int = 0
    neg_edges: int = 0

    def summary(self) -> dict:
        return dict(self.__dict__)


def _overlapping_pairs(keysets: Sequence[Iterable], theta_overlap: int, cap: int,
                       report: GraphReport) -> set[tuple[int, int]]:
    """Index pairs whose key sets share more than ``theta_overlap`` keys.

    The inverted index is held as a sparse candidate-by-key incidence matrix;
    its Gram matrix counts shared keys for every co-bucketed pair at once.
    """
    key_id: dict = {}
    rows, cols = [], []
    for i, keys in enumerate(keysets):
        for k in keys:
            rows.append(i)
            cols.append(key_id.setdefault(k, len(key_id)))
    if not rows:
        return set()
    n = len(keysets)
    inc = sparse.csr_matrix((np.ones(len(rows), dtype=np.int32), (rows, cols)),
                            shape=(n, len(key_id)))
    df = np.asarray(inc.sum(axis=0)).ravel()
    big = df > cap
    if big.any():
        report.skipped_buckets += int(big.sum())
        log.warning("skipping %d buckets larger than %d candidates", int(big.sum()), cap)
        inc = inc[:, np.flatnonzero(~big)]
    gram = sparse.triu(inc @ inc.T, k=1).tocoo()
    hit = gram.data > theta_overlap
    return set(zip(gram.row[hit].tolist(), gram.col[hit].tolist()))


_WORK: dict = {}


def _evaluate_chunk(chunk):
    cands = _WORK["cands"]
    cfg, index = _WORK["cfg"], _WORK["index"]
    sides: dict[int, _Side] = {}

    def side_of(idx):
        s = sides.get(idx)
        if s is None:
            s = sides[idx] = _Side(cands[idx], index)
        return s

    out = []
    for i, j, want_pos, want_neg in chunk:
        a, b = cands[i], cands[j]
        if (len(a), a.pairs, a.id) > (len(b), b.pairs, b.id):
            i, j, a, b = j, i, b, a
        wp = wn = 0.0
        if want_pos:
            smaller = min(len(a), len(b))
            need = cfg.theta_edge * smaller - 1e-9
            k = _intersection(a, side_of(j), need=need)
            w = max(k / len(a), k / len(b))
            if w >= cfg.theta_edge:
                wp = w
        if want_neg:
            f = len(_conflicts(side_of(i), side_of(j)))
            w = -max(f / len(a), f / len(b)) if f else 0.0
            if w < cfg.tau:
                wn = w
        if wp or wn:
            out.append((a.id, b.id, wp, wn))
    return out


def build_graph(candidates: Sequence[CandidateTable], cfg: GraphConfig = GraphConfig(),
                mcfg: MatchConfig = MatchConfig(), synonyms: SynonymStore = EMPTY_SYNONYMS,
                workers: int = 1, report: GraphReport | None = None) -> CompatibilityGraph:
    """Compatibility graph over candidates, comparing only co-bucketed pairs.

    Positive weights are evaluated for pairs sharing more than
    ``theta_overlap`` exact (left, right) pairs and kept when at least
    ``theta_edge``; negative weights for pairs sharing more than
    ``theta_overlap`` exact left values, kept when below ``tau``.
    """
    report = report if report is not None else GraphReport()
    cands = list(candidates)
    ids = [c.id for c in cands]
    if len(set(ids)) != len(ids):
        raise ValueError("candidate ids must be unique")
    report.candidates = len(cands)
    pos = _overlapping_pairs([c.pairs for c in cands], cfg.theta_overlap, cfg.bucket_cap, report)
    neg: set = set()
    if cfg.use_negative:
        neg = _overlapping_pairs([c.by_left.keys() for c in cands], cfg.theta_overlap,
                                 cfg.bucket_cap, report)
    report.pos_pairs_evaluated = len(pos)
    report.neg_pairs_evaluated = len(neg)
    work = [(i, j, (i, j) in pos, (i, j) in neg) for i, j in sorted(pos | neg)]
    # group by first index so per-candidate lookup structures are reused
    n_chunks = max(1, min(len(work), workers * 8))
    size = math.ceil(len(work) / n_chunks) if work else 1
    chunks = [work[k:k + size] for k in range(0, len(work), size)]
    _WORK.update(cands=cands, cfg=cfg, index=table_index(cands, mcfg, synonyms))
    try:
        results = pmap(_evaluate_chunk, chunks, workers)
    finally:
        _WORK.clear()
    g_pos, g_neg = {}, {}
    for part in results:
        for a, b, wp, wn in part:
            if wp:
                g_pos[_key(a, b)] = wp
            if wn:
                g_neg[_key(a, b)] = wn
    report.pos_edges, report.neg_edges = len(g_pos), len(g_neg)
    return CompatibilityGraph(tuple(ids), g_pos, g_neg)
