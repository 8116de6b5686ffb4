"""Table corpus ingestion and cell normalization.

A corpus is a JSON-lines file with one table per line::

    {"id": "t1", "domain": "example.org", "headers": ["a", "b"], "rows": [["x", "y"]]}
"""
from __future__ import annotations

import json
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

log = logging.getLogger(__name__)

_FOOTNOTE = re.compile(r"\[\s*\d+\s*\]")
_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class TableRecord:
    id: str
    domain: str
    headers: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        width = len(self.headers)
        for row in self.rows:
            if len(row) != width:
                raise ValueError(f"table {self.id}: row width {len(row)} != {width} headers")

    @property
    def n_cols(self) -> int:
        return len(self.headers)

    def columns(self) -> list[tuple[str, ...]]:
        return [tuple(row[j] for row in self.rows) for j in range(self.n_cols)]

    @classmethod
    def from_columns(cls, id, domain, headers, columns) -> "TableRecord":
        rows = tuple(zip(*columns)) if columns else ()
        return cls(id, domain, tuple(headers), tuple(tuple(r) for r in rows))

    def normalized(self) -> "TableRecord":
        rows = tuple(tuple(normalize_cell(c) for c in row) for row in self.rows)
        return TableRecord(self.id, self.domain, self.headers, rows)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "domain": self.domain,
            "headers": list(self.headers),
            "rows": [list(r) for r in self.rows],
        }


def _normalize_once(text: str) -> str:
    text = unicodedata.normalize("NFKC", text).lower()
    text = _FOOTNOTE.sub(" ", text)
    text = "".join(ch for ch in text if not unicodedata.category(ch).startswith("P"))
    text = unicodedata.normalize("NFKC", text)
    return _WS.sub(" ", text).strip()


def normalize_cell(raw: str) -> str:
    """Lowercase, drop footnote marks like ``[1]``, strip punctuation and
    collapse whitespace.

    >>> normalize_cell("American Samoa (US)")
    'american samoa us'
    >>> normalize_cell("  KOR ")
    'kor'
    """
    text = raw
    # NFKC/lowercase interact on a handful of code points; iterate to a fixpoint
    for _ in range(4):
        out = _normalize_once(text)
        if out == text:
            break
        text = out
    return text


def nonspace_len(value: str) -> int:
    """Length used by edit-distance thresholds: non-space characters only."""
    return sum(1 for ch in value if not ch.isspace())


@dataclass
class LoadStats:
    loaded: int = 0
    skipped: int = 0
    ragged_rows: int = 0
    errors: list[str] = field(default_factory=list)


def _parse_record(obj, stats: LoadStats) -> TableRecord:
    if not isinstance(obj, dict):
        raise ValueError("line is not a JSON object")
    tid, domain, headers, rows = obj["id"], obj.get("domain", ""), obj["headers"], obj["rows"]
    if not isinstance(tid, str) or not isinstance(headers, list) or not isinstance(rows, list):
        raise ValueError("bad field types")
    headers = tuple(str(h) for h in headers)
    width = len(headers)
    fixed = []
    for row in rows:
        if not isinstance(row, list):
            raise ValueError("row is not a list")
        cells = tuple("" if c is None else str(c) for c in row)
        if len(cells) != width:
            stats.ragged_rows += 1
            cells = (cells + ("",) * width)[:width]
        fixed.append(cells)
    return TableRecord(tid, str(domain), headers, tuple(fixed))


def load_corpus(path, stats: LoadStats | None = None, normalize: bool = False) -> Iterator[TableRecord]:
    """Stream tables from a JSON-lines corpus file in file order.

    Malformed lines are skipped and counted in ``stats``; ragged rows are
    padded with empty cells or truncated to the header width.
    """
    stats = stats if stats is not None else LoadStats()
    path = Path(path)
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = _parse_record(json.loads(line), stats)
            except (ValueError, KeyError, TypeError) as exc:
                stats.skipped += 1
                stats.errors.append(f"{path}:{lineno}: {exc}")
                log.warning("skipping malformed line %s:%d (%s)", path, lineno, exc)
                continue
            if rec.id in seen:
                stats.skipped += 1
                stats.errors.append(f"{path}:{lineno}: duplicate table id {rec.id!r}")
                log.warning("skipping duplicate table id %r", rec.id)
                continue
            seen.add(rec.id)
            stats.loaded += 1
            yield rec.normalized() if normalize else rec


def write_corpus(tables: Iterable[TableRecord], path) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for t in tables:
            fh.write(json.dumps(t.to_json(), ensure_ascii=False) + "\n")
            n += 1
    return n


def corpus_stats(tables: Iterable[TableRecord]) -> dict:
    n_tables = n_cols = n_rows = 0
    domains = set()
    for t in tables:
        n_tables += 1
        n_cols += t.n_cols
        n_rows += len(t.rows)
        domains.add(t.domain)
    return {"tables": n_tables, "columns": n_cols, "rows": n_rows, "domains": len(domains)}
