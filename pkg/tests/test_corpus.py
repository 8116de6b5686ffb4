import json

import pytest
from hypothesis import given, strategies as st

from mapsynth.corpus import (LoadStats, TableRecord, corpus_stats, load_corpus, nonspace_len,
                             normalize_cell, write_corpus)
from mapsynth.generator import benchmark_spec, generate_tables


@pytest.mark.parametrize("raw,expected", [
    ("American Samoa (US)", "american samoa us"),
    ("", ""),
    ("  KOR ", "kor"),
    ("Paris[1]", "paris"),
    ("Korea, South [ 12 ]", "korea south"),
    ("São Tomé", "são tomé"),
    ("Ｔｏｋｙｏ", "tokyo"),
    ("a\t\n  b", "a b"),
])
def test_normalize_examples(raw, expected):
    assert normalize_cell(raw) == expected


def test_threshold_lengths_ignore_spaces():
    assert nonspace_len(normalize_cell("American Samoa")) == 13
    assert nonspace_len(normalize_cell("American Samoa (US)")) == 15


@given(st.text(max_size=40))
def test_normalize_idempotent(s):
    once = normalize_cell(s)
    assert normalize_cell(once) == once


@given(st.lists(st.lists(st.text(max_size=5), min_size=3, max_size=3), max_size=6))
def test_rows_columns_inverse(rows):
    t = TableRecord("t", "d", ("a", "b", "c"), tuple(tuple(r) for r in rows))
    back = TableRecord.from_columns("t", "d", t.headers, t.columns())
    assert back.rows == t.rows or not rows


def test_ragged_row_rejected_in_constructor():
    with pytest.raises(ValueError):
        TableRecord("t", "d", ("a", "b"), (("x",),))


def _write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def test_load_two_wellformed(tmp_path):
    p = tmp_path / "c.jsonl"
    _write_lines(p, [
        json.dumps({"id": "a", "domain": "x.org", "headers": ["h"], "rows": [["1"]]}),
        json.dumps({"id": "b", "domain": "y.org", "headers": ["h"], "rows": [["2"]]}),
    ])
    assert [t.id for t in load_corpus(p)] == ["a", "b"]


def test_load_skips_malformed_and_duplicates(tmp_path):
    p = tmp_path / "c.jsonl"
    _write_lines(p, [
        json.dumps({"id": "a", "domain": "x.org", "headers": ["h"], "rows": [["1"]]}),
        "{not json",
        json.dumps({"id": "a", "domain": "x.org", "headers": ["h"], "rows": []}),
        json.dumps({"domain": "x.org", "headers": ["h"], "rows": []}),
    ])
    stats = LoadStats()
    tables = list(load_corpus(p, stats))
    assert len(tables) == 1
    assert stats.skipped == 3
    assert len(stats.errors) == 3


def test_load_one_good_one_bad(tmp_path):
    p = tmp_path / "c.jsonl"
    _write_lines(p, [json.dumps({"id": "a", "domain": "", "headers": [], "rows": []}), "[1, 2"])
    stats = LoadStats()
    assert len(list(load_corpus(p, stats))) == 1
    assert stats.skipped == 1


def test_ragged_rows_padded_and_truncated(tmp_path):
    p = tmp_path / "c.jsonl"
    _write_lines(p, [json.dumps({"id": "a", "domain": "d", "headers": ["x", "y"],
                                 "rows": [["1"], ["1", "2", "3"], ["4", "5"]]})])
    stats = LoadStats()
    (t,) = list(load_corpus(p, stats))
    assert t.rows == (("1", ""), ("1", "2"), ("4", "5"))
    assert stats.ragged_rows == 2


def test_missing_file_is_fatal(tmp_path):
    with pytest.raises(OSError):
        list(load_corpus(tmp_path / "nope.jsonl"))


def test_generated_corpus_roundtrip(tmp_path):
    tables, _, _ = generate_tables(benchmark_spec(n_tables=100), seed=3)
    p = tmp_path / "c.jsonl"
    write_corpus(tables, p)
    assert list(load_corpus(p)) == tables


def test_normalize_on_load(tmp_path):
    p = tmp_path / "c.jsonl"
    _write_lines(p, [json.dumps({"id": "a", "domain": "d", "headers": ["x"], "rows": [["  KOR "]]})])
    (t,) = list(load_corpus(p, normalize=True))
    assert t.rows == (("kor",),)


def test_corpus_stats():
    t = TableRecord("a", "d", ("x", "y"), (("1", "2"), ("3", "4")))
    u = TableRecord("b", "e", ("x",), (("1",),))
    assert corpus_stats([t, u]) == {"tables": 2, "columns": 3, "rows": 3, "domains": 2}
