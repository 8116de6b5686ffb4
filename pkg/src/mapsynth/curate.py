"""Popularity statistics, ranking, evaluation and export of synthesized mappings."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .resolve import ResolvedPartition, merged_pairs

Pair = tuple[str, str]

_NUMERIC = re.compile(r"^[+-]?\d+(?:[.,]\d+)*$")


@dataclass(frozen=True)
class SynthesizedMapping:
    mapping_id: str
    pairs: tuple[Pair, ...]
    n_tables: int = 1
    n_domains: int = 1
    contributing_sources: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(sorted(set(map(tuple, self.pairs)))))
        object.__setattr__(self, "contributing_sources",
                           tuple(sorted(tuple(s) for s in self.contributing_sources)))

    @property
    def pair_set(self) -> frozenset:
        return frozenset(self.pairs)

    def to_json(self) -> dict:
        return {
            "mapping_id": self.mapping_id,
            "n_tables": self.n_tables,
            "n_domains": self.n_domains,
            "sources": [list(s) for s in self.contributing_sources],
            "pairs": [list(p) for p in self.pairs],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SynthesizedMapping":
        return cls(
            mapping_id=obj["mapping_id"],
            pairs=tuple((l, r) for l, r in obj["pairs"]),
            n_tables=obj.get("n_tables", 1),
            n_domains=obj.get("n_domains", 1),
            contributing_sources=tuple((t, d) for t, d in obj.get("sources", [])),
        )


def compute_stats(resolved: ResolvedPartition, mapping_id: str | None = None) -> SynthesizedMapping | None:
    """Mapping record for a resolved partition; None when nothing was kept."""
    if not resolved.kept:
        return None
    sources = sorted({(t.source_table or t.id, t.domain) for t in resolved.kept})
    return SynthesizedMapping(
        mapping_id=mapping_id or resolved.partition_id,
        pairs=tuple(merged_pairs(resolved)),
        n_tables=len(resolved.kept),
        n_domains=len({t.domain for t in resolved.kept}),
        contributing_sources=tuple(sources),
    )


def rank_key(m: SynthesizedMapping):
    return (-m.n_domains, -m.n_tables, -len(m.pairs), m.mapping_id)


def rank_and_filter(mappings: Iterable[SynthesizedMapping], min_domains: int = 8) -> list[SynthesizedMapping]:
    """Keep mappings seen on at least ``min_domains`` domains, most popular first."""
    return sorted((m for m in mappings if m.n_domains >= min_domains), key=rank_key)


def evaluate(b: Iterable[Pair], b_star: Iterable[Pair]) -> tuple[float, float, float]:
    """Precision, recall and f-score of ``b`` against ground truth ``b_star``.

    Two empty sets score (1, 1, 1).
    """
    b, b_star = set(map(tuple, b)), set(map(tuple, b_star))
    if not b and not b_star:
        return 1.0, 1.0, 1.0
    hit = len(b & b_star)
    p = hit / len(b) if b else 0.0
    r = hit / len(b_star) if b_star else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def is_numeric_mapping(m: SynthesizedMapping) -> bool:
    return bool(m.pairs) and all(_NUMERIC.match(r) for _, r in m.pairs)


@dataclass
class CaseScore:
    case_id: str
    mapping_id: str | None
    precision: float
    recall: float
    fscore: float


@dataclass
class EvalReport:
    cases: list[CaseScore] = field(default_factory=list)

    @property
    def macro(self) -> dict[str, float]:
        n = len(self.cases)
        if not n:
            return {"precision": 0.0, "recall": 0.0, "fscore": 0.0}
        return {
            "precision": sum(c.precision for c in self.cases) / n,
            "recall": sum(c.recall for c in self.cases) / n,
            "fscore": sum(c.fscore for c in self.cases) / n,
        }

    def to_json(self) -> dict:
        return {
            "cases": [c.__dict__ for c in self.cases],
            "macro": self.macro,
        }


def score_cases(mappings: Sequence[SynthesizedMapping], truth: Sequence[SynthesizedMapping]) -> EvalReport:
    """Score each ground-truth case by its best-f-score synthesized mapping."""
    report = EvalReport()
    by_left: dict[str, set[int]] = {}
    for k, m in enumerate(mappings):
        for l, _ in m.pairs:
            by_left.setdefault(l, set()).add(k)
    for case in truth:
        best = CaseScore(case.mapping_id, None, 0.0, 0.0, 0.0)
        # a mapping sharing no left value with the case scores zero
        cands = sorted({k for l, _ in case.pairs for k in by_left.get(l, ())})
        for k in cands:
            p, r, f = evaluate(mappings[k].pairs, case.pairs)
            if f > best.fscore:
                best = CaseScore(case.mapping_id, mappings[k].mapping_id, p, r, f)
        report.cases.append(best)
    return report


def _escape(v: str) -> str:
    return v.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")


def _unescape(v: str) -> str:
    out, i = [], 0
    while i < len(v):
        ch = v[i]
        if ch == "\\" and i + 1 < len(v):
            nxt = v[i + 1]
            out.append({"t": "\t", "n": "\n", "r": "\r", "\\": "\\"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def export_mappings(mappings: Iterable[SynthesizedMapping], path, format: str = "jsonl") -> int:
    path = Path(path)
    n = 0
    if format == "jsonl":
        with path.open("w", encoding="utf-8") as fh:
            for m in mappings:
                fh.write(json.dumps(m.to_json(), ensure_ascii=False) + "\n")
                n += 1
    elif format == "tsv":
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write("left\tright\tmapping_id\n")
            for m in mappings:
                for l, r in m.pairs:
                    fh.write(f"{_escape(l)}\t{_escape(r)}\t{_escape(m.mapping_id)}\n")
                n += 1
    else:
        raise ValueError(f"unknown export format {format!r}")
    return n


def load_mappings(path) -> list[SynthesizedMapping]:
    with Path(path).open(encoding="utf-8") as fh:
        return [SynthesizedMapping.from_json(json.loads(line)) for line in fh if line.strip()]


def load_tsv_pairs(path) -> dict[str, list[Pair]]:
    out: dict[str, list[Pair]] = {}
    with Path(path).open(encoding="utf-8", newline="") as fh:
        next(fh, None)
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            l, r, mid = line.split("\t")
            out.setdefault(_unescape(mid), []).append((_unescape(l), _unescape(r)))
    return out
