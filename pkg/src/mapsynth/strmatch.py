"""Approximate string matching with length-relative edit thresholds.

Values are compared after normalization. Spaces are ignored both when
measuring lengths and when counting edits, so "american samoa" and
"american samoa us" are 13 and 15 characters long and 2 edits apart.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable

import numpy as np

from .corpus import normalize_cell


@dataclass(frozen=True)
class MatchConfig:
    f_ed: float = 0.2
    k_ed: int = 10

    def __post_init__(self):
        if not 0 <= self.f_ed < 1:
            raise ValueError(f"f_ed must be in [0, 1), got {self.f_ed}")
        if self.k_ed < 0:
            raise ValueError(f"k_ed must be >= 0, got {self.k_ed}")


EXACT = MatchConfig(f_ed=0.0, k_ed=0)


def _squash(value: str) -> str:
    return "".join(value.split())


def _frac_floor(n: int, f: float) -> int:
    # guards against 0.29 * 100 == 28.999999999999996
    return math.floor(n * f + 1e-9)


def edit_threshold(v1: str, v2: str, cfg: MatchConfig = MatchConfig()) -> int:
    n1, n2 = len(_squash(v1)), len(_squash(v2))
    return min(_frac_floor(n1, cfg.f_ed), _frac_floor(n2, cfg.f_ed), cfg.k_ed)


def banded_distance(a: str, b: str, bound: int) -> int:
    """Levenshtein distance of ``a`` and ``b`` if it is at most ``bound``,
    otherwise ``bound + 1``.

    Only cells within ``bound`` of the main diagonal are filled, giving
    O(bound * min(|a|, |b|)) time.
    """
    if len(a) > len(b):
        a, b = b, a
    n, m = len(a), len(b)
    if m - n > bound:
        return bound + 1
    over = bound + 1
    # prev[j] holds dist[i-1][j]; cells outside the band stay at `over`
    prev = [j if j <= bound else over for j in range(m + 1)]
    for i in range(1, n + 1):
        lo = max(1, i - bound)
        hi = min(m, i + bound)
        cur = [over] * (m + 1)
        if i <= bound:
            cur[0] = i
        ai = a[i - 1]
        row_min = cur[0] if lo == 1 else over
        for j in range(lo, hi + 1):
            d = prev[j - 1] + (ai != b[j - 1])
            up = prev[j] + 1
            if up < d:
                d = up
            left = cur[j - 1] + 1
            if left < d:
                d = left
            cur[j] = d if d < over else over
            if d < row_min:
                row_min = d
        if row_min > bound:
            return over
        prev = cur
    return prev[m] if prev[m] <= bound else over


@lru_cache(maxsize=1 << 20)
def _approx(a: str, b: str, f_ed: float, k_ed: int) -> bool:
    sa, sb = _squash(a), _squash(b)
    if sa == sb:
        return True
    t = min(_frac_floor(len(sa), f_ed), _frac_floor(len(sb), f_ed), k_ed)
    if t == 0 or abs(len(sa) - len(sb)) > t:
        return False
    return banded_distance(sa, sb, t) <= t


def approx_match(v1: str, v2: str, cfg: MatchConfig = MatchConfig()) -> bool:
    if v1 == v2:
        return True
    if v2 < v1:
        v1, v2 = v2, v1
    return _approx(v1, v2, cfg.f_ed, cfg.k_ed)


class SynonymStore:
    """Disjoint groups of synonymous values; membership is an equivalence
    relation. Groups sharing a value are merged on load."""

    def __init__(self, groups: Iterable[Iterable[str]] = ()):
        parent: dict[str, str] = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for group in groups:
            vals = [normalize_cell(v) for v in group]
            vals = [v for v in vals if v]
            for v in vals:
                parent.setdefault(v, v)
            for v in vals[1:]:
                ra, rb = find(vals[0]), find(v)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        self._group = {v: find(v) for v in parent}

    @classmethod
    def from_tsv(cls, path) -> "SynonymStore":
        groups = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            cells = [c for c in line.split("\t") if c.strip()]
            if len(cells) >= 2:
                groups.append(cells)
        return cls(groups)

    def __len__(self):
        return len(set(self._group.values()))

    def __bool__(self):
        return bool(self._group)

    def group_of(self, value: str) -> str | None:
        return self._group.get(value)

    def groups(self) -> list[list[str]]:
        out: dict[str, list[str]] = {}
        for v, g in self._group.items():
            out.setdefault(g, []).append(v)
        return sorted(sorted(vs) for vs in out.values())


EMPTY_SYNONYMS = SynonymStore()


def are_synonyms(v1: str, v2: str, store: SynonymStore = EMPTY_SYNONYMS) -> bool:
    if v1 == v2:
        return True
    g1 = store.group_of(v1)
    return g1 is not None and g1 == store.group_of(v2)


def values_equivalent(v1: str, v2: str, cfg: MatchConfig = MatchConfig(),
                      store: SynonymStore = EMPTY_SYNONYMS) -> bool:
    return approx_match(v1, v2, cfg) or are_synonyms(v1, v2, store)


class ValueIndex:
    """Equivalence neighbourhoods precomputed over a fixed set of values.

    Candidate pairs within each length window are screened with the bag
    distance (a lower bound on edit distance, computed on character-count
    vectors in bulk) before the banded check. Queries for values outside
    the set fall back to a scan.
    """

    def __init__(self, values: Iterable[str], cfg: MatchConfig = MatchConfig(),
                 synonyms: SynonymStore = EMPTY_SYNONYMS, block: int = 256):
        self.cfg, self.syn = cfg, synonyms
        vals = sorted(set(values))
        self.values = vals
        by_sq: dict[str, list[str]] = {}
        for v in vals:
            by_sq.setdefault(_squash(v), []).append(v)
        sqs = sorted(by_sq)
        near = _near_squashed(sqs, cfg, block)
        by_group: dict[str, list[str]] = {}
        for v in vals:
            g = synonyms.group_of(v)
            if g is not None:
                by_group.setdefault(g, []).append(v)
        self._eq: dict[str, frozenset] = {}
        for sq in sqs:
            members = set(by_sq[sq])
            for other in near.get(sq, ()):
                members.update(by_sq[other])
            for v in by_sq[sq]:
                eq = set(members)
                g = synonyms.group_of(v)
                if g is not None:
                    eq.update(by_group[g])
                self._eq[v] = frozenset(eq)

    def __contains__(self, value: str) -> bool:
        return value in self._eq

    def equivalents(self, value: str) -> frozenset:
        """Indexed values equivalent to ``value`` (itself included when indexed)."""
        eq = self._eq.get(value)
        if eq is None:
            eq = frozenset(v for v in self.values if values_equivalent(value, v, self.cfg, self.syn))
            self._eq[value] = eq
        return eq

    def equivalent(self, v1: str, v2: str) -> bool:
        if v1 == v2:
            return True
        if v1 in self._eq:
            return v2 in self._eq[v1] if v2 in self._eq else values_equivalent(v1, v2, self.cfg, self.syn)
        return values_equivalent(v1, v2, self.cfg, self.syn)


def _deletions(s: str, d: int) -> set[str]:
    out = {s}
    frontier = {s}
    for _ in range(d):
        frontier = {w[:i] + w[i + 1:] for w in frontier for i in range(len(w))}
        out |= frontier
    return out


def _near_squashed(sqs: list[str], cfg: MatchConfig, block: int, fast_edits: int = 2) -> dict[str, list[str]]:
    """Pairs of distinct space-free strings within their edit threshold.

    Pairs whose shorter string allows at most ``fast_edits`` edits are found
    through shared deletion variants; longer strings are screened with the
    bag distance in bulk. Every survivor is confirmed by the banded check.
    """
    out: dict[str, list[str]] = {}
    if cfg.f_ed == 0 or cfg.k_ed == 0 or len(sqs) < 2:
        return out

    def t_of(n):
        return min(_frac_floor(n, cfg.f_ed), cfg.k_ed)

    def confirm(a, b):
        if len(a) > len(b) or (len(a) == len(b) and a > b):
            a, b = b, a
        t = t_of(len(a))
        if 0 < t and len(b) - len(a) <= t and banded_distance(a, b, t) <= t:
            out.setdefault(a, []).append(b)
            out.setdefault(b, []).append(a)

    by_len: dict[int, list[str]] = {}
    for s in sqs:
        by_len.setdefault(len(s), []).append(s)
    lengths = sorted(by_len)
    # deletion variants cover pairs whose shorter side allows 1..fast_edits edits
    fast = [n for n in lengths if 1 <= t_of(n) <= fast_edits]
    if fast:
        top = max(fast) + fast_edits
        buckets: dict[str, list[str]] = {}
        for n in lengths:
            if t_of(n) == 0 or n > top:
                continue
            d = min(t_of(n), fast_edits)
            for s in by_len[n]:
                for v in _deletions(s, d):
                    buckets.setdefault(v, []).append(s)
        seen = set()
        for group in buckets.values():
            if len(group) < 2:
                continue
            for i, a in enumerate(group):
                for b in group[i + 1:]:
                    key = (a, b) if a < b else (b, a)
                    if key in seen:
                        continue
                    seen.add(key)
                    if t_of(min(len(a), len(b))) <= fast_edits:
                        confirm(a, b)
    slow = [n for n in lengths if t_of(n) > fast_edits]
    if not slow:
        return out
    alphabet = {ch: k for k, ch in enumerate(sorted({ch for n in lengths if n >= slow[0] for s in by_len[n] for ch in s}))}
    hist = {}
    for n in lengths:
        if n < slow[0]:
            continue
        h = np.zeros((len(by_len[n]), len(alphabet)), dtype=np.int16)
        for i, s in enumerate(by_len[n]):
            for ch in s:
                h[i, alphabet[ch]] += 1
        hist[n] = h
    for n in slow:
        t = t_of(n)
        for m in range(n, n + t + 1):
            if m not in by_len:
                continue
            ha, hb = hist[n], hist[m]
            for lo in range(0, len(ha), block):
                common = np.minimum(ha[lo:lo + block, None, :], hb[None, :, :]).sum(axis=2)
                ii, jj = np.nonzero(m - common <= t)
                for i, j in zip(ii.tolist(), jj.tolist()):
                    a, b = by_len[n][lo + i], by_len[m][j]
                    if m == n and a >= b:
                        continue
                    confirm(a, b)
    return out
