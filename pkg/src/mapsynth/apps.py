"""Lookup applications over curated mappings: auto-fill, auto-correct and
auto-join bridging. All lookups are exact over normalized values."""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .curate import SynthesizedMapping

log = logging.getLogger(__name__)


class MappingStore:
    def __init__(self, mappings: Sequence[SynthesizedMapping]):
        self.mappings = list(mappings)
        self.by_left: dict[str, set[int]] = {}
        self.by_right: dict[str, set[int]] = {}
        self.forward: list[dict[str, list[str]]] = []
        self.backward: list[dict[str, list[str]]] = []
        for k, m in enumerate(self.mappings):
            fwd: dict[str, list[str]] = {}
            bwd: dict[str, list[str]] = {}
            for l, r in m.pairs:
                self.by_left.setdefault(l, set()).add(k)
                self.by_right.setdefault(r, set()).add(k)
                fwd.setdefault(l, []).append(r)
                bwd.setdefault(r, []).append(l)
            self.forward.append(fwd)
            self.backward.append(bwd)

    def __len__(self):
        return len(self.mappings)

    def with_left(self, value: str) -> set[int]:
        return self.by_left.get(value, set())

    def with_right(self, value: str) -> set[int]:
        return self.by_right.get(value, set())

    def with_pair(self, l: str, r: str) -> set[int]:
        return {k for k in self.with_left(l) if r in self.forward[k][l]}

    def _order(self, k: int):
        m = self.mappings[k]
        return (-m.n_domains, m.mapping_id)


@dataclass
class LookupResult:
    mapping_id: str | None
    rows: list = field(default_factory=list)
    diagnostic: str = ""


def auto_fill(store: MappingStore, examples: Sequence[tuple[str, str]], keys: Sequence[str]) -> LookupResult:
    """Fill values for ``keys`` from the mapping that agrees with most examples."""
    if not examples:
        raise ValueError("auto_fill needs at least one example pair")
    votes: Counter = Counter()
    for l, r in examples:
        for k in store.with_pair(l, r):
            votes[k] += 1
    if not votes:
        return LookupResult(None, [], "no mapping contains any example pair")
    best = min(votes, key=lambda k: (-votes[k], *store._order(k)))
    fwd = store.forward[best]
    rows = []
    for key in keys:
        vals = fwd.get(key)
        rows.append((key, sorted(vals)[0] if vals else None))
    return LookupResult(store.mappings[best].mapping_id, rows)


def auto_correct(store: MappingStore, column: Sequence[str]) -> LookupResult:
    """Suggest rewriting minority-side cells of a mixed column to the majority side."""
    if not column:
        return LookupResult(None, [], "empty column")
    cells = [c for c in column if c]
    cands: set[int] = set()
    for c in cells:
        cands |= store.with_left(c) | store.with_right(c)
    best, best_key = None, None
    for k in sorted(cands):
        fwd, bwd = store.forward[k], store.backward[k]
        n_left = sum(1 for c in cells if c in fwd)
        n_right = sum(1 for c in cells if c in bwd)
        if not n_left or not n_right:
            continue
        key = (-(n_left + n_right), *store._order(k))
        if best_key is None or key < best_key:
            best, best_key = k, key
    if best is None:
        return LookupResult(None, [], "no mapping covers both sides of the column")
    fwd, bwd = store.forward[best], store.backward[best]
    n_left = sum(1 for c in cells if c in fwd)
    n_right = sum(1 for c in cells if c in bwd)
    majority_left = n_left >= n_right
    rows = []
    for i, c in enumerate(column):
        if not c or (c in fwd and c in bwd):
            continue
        if majority_left and c in bwd:
            lefts = sorted(bwd[c])
            if len(lefts) == 1:
                rows.append((i, c, lefts[0]))
        elif not majority_left and c in fwd:
            rows.append((i, c, sorted(fwd[c])[0]))
    return LookupResult(store.mappings[best].mapping_id, rows)


def auto_join_bridge(store: MappingStore, left_keys: Sequence[str], right_keys: Sequence[str],
                     floor: float = 0.5) -> LookupResult:
    """Join two key lists through the mapping that best covers both.

    Either orientation of a mapping may serve as the bridge; the score is the
    smaller of the two coverage fractions.
    """
    lk, rk = set(left_keys), set(right_keys)
    if not lk or not rk:
        return LookupResult(None, [], "empty key list")
    cands: set[int] = set()
    for v in lk | rk:
        cands |= store.with_left(v) | store.with_right(v)
    best, best_key = None, None
    for k in sorted(cands):
        fwd, bwd = store.forward[k], store.backward[k]
        for forward, a, b in ((True, fwd, bwd), (False, bwd, fwd)):
            cov = min(len(lk & a.keys()) / len(lk), len(rk & b.keys()) / len(rk))
            key = (-cov, *store._order(k), not forward)
            if cov >= floor and (best_key is None or key < best_key):
                best, best_key = (k, forward), key
    if best is None:
        return LookupResult(None, [], f"no mapping covers both key lists at >= {floor}")
    k, forward = best
    lookup = store.forward[k] if forward else store.backward[k]
    rows = sorted({(a, b) for a in lk if a in lookup for b in lookup[a] if b in rk})
    return LookupResult(store.mappings[k].mapping_id, rows)
