"""Candidate two-column table extraction.

Columns are first scored for coherence with NPMI over corpus co-occurrence
statistics; incoherent columns are dropped. Every ordered pair of the
remaining columns that satisfies an approximate functional dependency
becomes a candidate binary table.
"""
from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy import sparse

from .corpus import TableRecord
from .parallel import pmap

log = logging.getLogger(__name__)

Pair = tuple[str, str]


@dataclass(frozen=True)
class ExtractConfig:
    coherence_threshold: float = 0.0
    theta_fd: float = 0.95
    min_rows: int = 4
    max_coherence_values: int = 200

    def __post_init__(self):
        if not 0 < self.theta_fd <= 1:
            raise ValueError(f"theta_fd must be in (0, 1], got {self.theta_fd}")
        if self.min_rows < 1:
            raise ValueError("min_rows must be positive")


@dataclass(frozen=True)
class CandidateTable:
    id: str
    pairs: tuple[Pair, ...]
    source_table: str = ""
    left_col: int = 0
    right_col: int = 1
    domain: str = ""

    def __post_init__(self):
        pairs = tuple(sorted(set(self.pairs)))
        if any(not l or not r for l, r in pairs):
            raise ValueError(f"candidate {self.id}: empty value in pairs")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self):
        return len(self.pairs)

    @property
    def pair_set(self) -> frozenset:
        ps = self.__dict__.get("_pair_set")
        if ps is None:
            ps = frozenset(self.pairs)
            object.__setattr__(self, "_pair_set", ps)
        return ps

    @property
    def by_left(self) -> dict[str, tuple[str, ...]]:
        bl = self.__dict__.get("_by_left")
        if bl is None:
            acc: dict[str, list[str]] = {}
            for l, r in self.pairs:
                acc.setdefault(l, []).append(r)
            bl = {l: tuple(rs) for l, rs in acc.items()}
            object.__setattr__(self, "_by_left", bl)
        return bl

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "source_table": self.source_table,
            "left_col": self.left_col,
            "right_col": self.right_col,
            "domain": self.domain,
            "pairs": [list(p) for p in self.pairs],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CandidateTable":
        return cls(
            id=obj["id"],
            pairs=tuple((l, r) for l, r in obj["pairs"]),
            source_table=obj.get("source_table", ""),
            left_col=obj.get("left_col", 0),
            right_col=obj.get("right_col", 1),
            domain=obj.get("domain", ""),
        )


class CooccurrenceIndex:
    """Value -> set of column ids over a corpus, plus the total column count.

    Column ids are assigned in corpus order, one per (table, column index).
    """

    def __init__(self, postings: dict[str, set[int]] | None = None, total_columns: int = 0):
        self.postings: dict[str, frozenset[int]] = {
            v: frozenset(cols) for v, cols in (postings or {}).items()
        }
        self.total_columns = total_columns
        self._vid: dict[str, int] | None = None
        self._counts: np.ndarray | None = None
        self._cooc = None

    def __len__(self):
        return len(self.postings)

    def count(self, v: str) -> int:
        return len(self.postings.get(v, ()))

    def joint_count(self, u: str, v: str) -> int:
        pu, pv = self.postings.get(u), self.postings.get(v)
        if not pu or not pv:
            return 0
        return len(pu & pv)

    @classmethod
    def merge(cls, parts: Sequence["CooccurrenceIndex"]) -> "CooccurrenceIndex":
        """Combine partial indexes whose column ids are already globally offset."""
        postings: dict[str, set[int]] = {}
        total = 0
        for part in parts:
            total += part.total_columns
            for v, cols in part.postings.items():
                postings.setdefault(v, set()).update(cols)
        return cls(postings, total)

    def _prepare(self):
        if self._vid is not None:
            return
        values = sorted(self.postings)
        self._vid = {v: i for i, v in enumerate(values)}
        self._counts = np.array([len(self.postings[v]) for v in values], dtype=np.float64)
        rows, cols = [], []
        for i, v in enumerate(values):
            ps = self.postings[v]
            rows.extend([i] * len(ps))
            cols.extend(ps)
        inc = sparse.csr_matrix(
            (np.ones(len(rows), dtype=np.float64), (rows, cols)),
            shape=(len(values), max(self.total_columns, 1)),
        )
        self._cooc = (inc @ inc.T).tocsr()

    def joint_counts(self, values: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
        """Per-value counts and the dense matrix of pairwise joint counts."""
        self._prepare()
        ids = [self._vid.get(v, -1) for v in values]
        known = [i for i in ids if i >= 0]
        k = len(values)
        counts = np.zeros(k)
        joint = np.zeros((k, k))
        if known:
            pos = np.array([n for n, i in enumerate(ids) if i >= 0])
            sub = self._cooc[known][:, known].toarray()
            counts[pos] = self._counts[known]
            joint[np.ix_(pos, pos)] = sub
        return counts, joint


def _column_values(table: TableRecord) -> list[list[str]]:
    return [list(col) for col in table.columns()]


def _partial_index(tables: Sequence[TableRecord], offset: int) -> CooccurrenceIndex:
    postings: dict[str, set[int]] = {}
    cid = offset
    for t in tables:
        for col in _column_values(t):
            for v in set(col):
                if v:
                    postings.setdefault(v, set()).add(cid)
            cid += 1
    return CooccurrenceIndex(postings, cid - offset)


def build_index(corpus: Iterable[TableRecord], workers: int = 1) -> CooccurrenceIndex:
    """Count, for every distinct non-empty value, the columns containing it."""
    tables = list(corpus)
    if workers <= 1 or len(tables) < 2:
        return _partial_index(tables, 0)
    chunk = math.ceil(len(tables) / workers)
    chunks, offsets, off = [], [], 0
    for i in range(0, len(tables), chunk):
        part = tables[i:i + chunk]
        chunks.append(part)
        offsets.append(off)
        off += sum(t.n_cols for t in part)
    parts = pmap(_partial_index_args, list(zip(chunks, offsets)), workers)
    return CooccurrenceIndex.merge(parts)


def _partial_index_args(args):
    return _partial_index(*args)


LOG = math.log10


def npmi(u: str, v: str, idx: CooccurrenceIndex) -> float:
    """Normalized PMI of two values from column co-occurrence, in [-1, 1]."""
    n = idx.total_columns
    cu, cv, cuv = idx.count(u), idx.count(v), idx.joint_count(u, v)
    if n <= 0 or cu == 0 or cv == 0 or cuv == 0:
        return -1.0
    return _npmi_from_counts(cu, cv, cuv, n)


def pmi(u: str, v: str, idx: CooccurrenceIndex) -> float:
    n = idx.total_columns
    cu, cv, cuv = idx.count(u), idx.count(v), idx.joint_count(u, v)
    if n <= 0 or cuv == 0:
        return -math.inf
    return pmi_from_counts(cu, cv, cuv, n)


def pmi_from_counts(cu: int, cv: int, cuv: int, n: int) -> float:
    return LOG((cuv / n) / ((cu / n) * (cv / n)))


def _npmi_from_counts(cu, cv, cuv, n) -> float:
    puv = cuv / n
    denom = -LOG(puv)
    if denom <= 0:
        # p(u,v) == 1 forces p(u) == p(v) == 1: perfect co-occurrence
        return 1.0
    score = pmi_from_counts(cu, cv, cuv, n) / denom
    return min(1.0, max(-1.0, score))


def coherence_values(column: Iterable[str], cap: int = 200) -> list[str]:
    """Distinct non-empty values of a column, keeping the ``cap`` most frequent."""
    freq = Counter(v for v in column if v)
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    return [v for v, _ in ranked[:cap]]


def column_coherence(column: Sequence[str], idx: CooccurrenceIndex, cap: int = 200) -> float:
    """Mean NPMI over all unordered pairs of distinct values in the column."""
    return coherence_many([column], idx, cap)[0]


def coherence_many(columns: Sequence[Sequence[str]], idx: CooccurrenceIndex, cap: int = 200) -> list[float]:
    """Column coherence for many columns with one bulk joint-count lookup."""
    out = [1.0] * len(columns)
    n = idx.total_columns
    idx._prepare()
    a_ids, b_ids, owners, known = [], [], [], []
    cu_all, cv_all = [], []
    for c, column in enumerate(columns):
        values = coherence_values(column, cap)
        k = len(values)
        if k < 2:
            continue
        if n <= 0:
            out[c] = -1.0
            continue
        ids = np.array([idx._vid.get(v, -1) for v in values])
        iu, ju = np.triu_indices(k, 1)
        a, b = ids[iu], ids[ju]
        owners.append(np.full(len(a), c))
        a_ids.append(a)
        b_ids.append(b)
    if not owners:
        return out
    owner = np.concatenate(owners)
    a = np.concatenate(a_ids)
    b = np.concatenate(b_ids)
    ok = (a >= 0) & (b >= 0)
    cuv = np.zeros(len(a))
    if ok.any():
        cuv[ok] = np.asarray(idx._cooc[a[ok], b[ok]]).ravel()
    cu = np.where(a >= 0, idx._counts[np.maximum(a, 0)], 0.0) if len(idx._counts) else np.zeros(len(a))
    cv = np.where(b >= 0, idx._counts[np.maximum(b, 0)], 0.0) if len(idx._counts) else np.zeros(len(a))
    scores = np.full(len(a), -1.0)
    ok = (cuv > 0) & (cu > 0) & (cv > 0)
    if ok.any():
        puv = cuv[ok] / n
        pmi_ = np.log10(puv / ((cu[ok] / n) * (cv[ok] / n)))
        denom = -np.log10(puv)
        with np.errstate(divide="ignore", invalid="ignore"):
            sc = np.where(denom > 0, pmi_ / np.where(denom > 0, denom, 1.0), 1.0)
        scores[ok] = np.clip(sc, -1.0, 1.0)
    sums = np.bincount(owner, weights=scores, minlength=len(columns))
    nums = np.bincount(owner, minlength=len(columns))
    for c in np.flatnonzero(nums).tolist():
        out[c] = float(sums[c] / nums[c])
    return out


def _fd_kept(pairs: Sequence[Pair]) -> int:
    by_left: dict[str, Counter] = {}
    for l, r in pairs:
        by_left.setdefault(l, Counter())[r] += 1
    return sum(max(c.values()) for c in by_left.values())


def fd_support(pairs: Sequence[Pair]) -> float:
    """Fraction of rows kept by the largest functional subset."""
    return _fd_kept(pairs) / len(pairs) if pairs else 0.0


def approximate_fd_holds(pairs: Sequence[Pair], theta: float = 0.95) -> bool:
    """True iff left -> right holds on at least a ``theta`` fraction of rows.

    ``pairs`` is the row multiset, duplicates included. Keeping the majority
    right value of every left value gives the largest functional subset.
    """
    if not pairs:
        return False
    return _fd_kept(pairs) >= theta * len(pairs) - 1e-9


@dataclass
class ExtractReport:
    tables: int = 0
    columns: int = 0
    columns_filtered: int = 0
    column_pairs: int = 0
    pairs_too_small: int = 0
    pairs_failed_fd: int = 0
    candidates: int = 0
    coherence: dict[str, list[float]] = field(default_factory=dict)

    @property
    def filtered_fraction(self) -> float:
        return 1 - self.candidates / self.column_pairs if self.column_pairs else 0.0

    def add(self, other: "ExtractReport"):
        for name in ("tables", "columns", "columns_filtered", "column_pairs",
                     "pairs_too_small", "pairs_failed_fd", "candidates"):
            setattr(self, name, getattr(self, name) + getattr(other, name))
        self.coherence.update(other.coherence)

    def summary(self) -> dict:
        return {
            "tables": self.tables,
            "columns": self.columns,
            "columns_filtered": self.columns_filtered,
            "column_pairs": self.column_pairs,
            "pairs_too_small": self.pairs_too_small,
            "pairs_failed_fd": self.pairs_failed_fd,
            "candidates": self.candidates,
            "filtered_fraction": round(self.filtered_fraction, 6),
        }


def table_candidates(table: TableRecord, cfg: ExtractConfig, idx: CooccurrenceIndex,
                     report: ExtractReport | None = None, scores: Sequence[float] | None = None,
                     ) -> list[CandidateTable]:
    report = report if report is not None else ExtractReport()
    report.tables += 1
    cols = _column_values(table)
    report.columns += len(cols)
    if scores is None:
        scores = coherence_many(cols, idx, cfg.max_coherence_values)
    scores = list(scores)
    report.coherence[table.id] = scores
    keep = [j for j, s in enumerate(scores) if s >= cfg.coherence_threshold]
    report.columns_filtered += len(cols) - len(keep)
    out = []
    for i in keep:
        for j in keep:
            if i == j:
                continue
            report.column_pairs += 1
            rows = [(a, b) for a, b in zip(cols[i], cols[j]) if a and b]
            if len(rows) < cfg.min_rows:
                report.pairs_too_small += 1
                continue
            if not approximate_fd_holds(rows, cfg.theta_fd):
                report.pairs_failed_fd += 1
                continue
            out.append(CandidateTable(
                id=f"{table.id}:{i}:{j}", pairs=tuple(rows), source_table=table.id,
                left_col=i, right_col=j, domain=table.domain,
            ))
    report.candidates += len(out)
    return out


def extract_candidates(corpus: Iterable[TableRecord], cfg: ExtractConfig, idx: CooccurrenceIndex,
                       report: ExtractReport | None = None) -> Iterator[CandidateTable]:
    """Coherence filter then FD filter over every table, in corpus order."""
    report = report if report is not None else ExtractReport()
    batch: list[TableRecord] = []

    def flush():
        cols = [c for t in batch for c in _column_values(t)]
        scores = coherence_many(cols, idx, cfg.max_coherence_values)
        pos = 0
        for t in batch:
            yield from table_candidates(t, cfg, idx, report, scores[pos:pos + t.n_cols])
            pos += t.n_cols
        batch.clear()

    for table in corpus:
        batch.append(table)
        if len(batch) >= 500:
            yield from flush()
    yield from flush()


def write_candidates(cands: Iterable[CandidateTable], path) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for c in cands:
            fh.write(json.dumps(c.to_json(), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_candidates(path) -> list[CandidateTable]:
    with Path(path).open(encoding="utf-8") as fh:
        return [CandidateTable.from_json(json.loads(line)) for line in fh if line.strip()]
