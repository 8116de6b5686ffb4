import random

import pytest
from hypothesis import given, settings, strategies as st

from mapsynth.strmatch import (EXACT, MatchConfig, SynonymStore, ValueIndex, approx_match, are_synonyms,
                               banded_distance, edit_threshold, values_equivalent)
from oracles import levenshtein

words = st.text(alphabet="abc d", max_size=14)


def test_threshold_examples():
    assert edit_threshold("american samoa", "american samoa us") == 2
    assert edit_threshold("usa", "rsa") == 0
    assert edit_threshold("x" * 100, "y" * 100) == 10


def test_usa_rsa_require_exact_match():
    assert not approx_match("usa", "rsa")
    assert approx_match("usa", "usa")


def test_american_samoa_matches():
    assert approx_match("american samoa", "american samoa us")


def test_config_validation():
    with pytest.raises(ValueError):
        MatchConfig(f_ed=1.0)
    with pytest.raises(ValueError):
        MatchConfig(k_ed=-1)


def test_threshold_float_floor():
    # 0.29 * 100 is 28.999999999999996 in binary floating point
    assert edit_threshold("a" * 100, "b" * 100, MatchConfig(0.29, 50)) == 29


@given(st.text(alphabet="ab", max_size=12), st.text(alphabet="ab", max_size=12), st.integers(0, 6))
def test_banded_distance_exact_within_bound(a, b, bound):
    d = levenshtein(a, b)
    got = banded_distance(a, b, bound)
    assert got == (d if d <= bound else bound + 1)


def test_banded_predicate_matches_full_dp_on_random_pairs():
    rng = random.Random(11)
    for _ in range(10_000):
        a = "".join(rng.choice("abcde") for _ in range(rng.randint(0, 40)))
        if rng.random() < 0.5:
            b = list(a)
            for _ in range(rng.randint(0, 6)):
                op = rng.randrange(3)
                i = rng.randrange(len(b) + 1)
                if op == 0:
                    b.insert(i, rng.choice("abcde"))
                elif b and i < len(b):
                    if op == 1:
                        del b[i]
                    else:
                        b[i] = rng.choice("abcde")
            b = "".join(b)
        else:
            b = "".join(rng.choice("abcde") for _ in range(rng.randint(0, 40)))
        t = edit_threshold(a, b)
        assert (banded_distance(a, b, t) <= t) == (levenshtein(a, b) <= t)


@given(words, words)
def test_approx_match_symmetric_reflexive(a, b):
    assert approx_match(a, a)
    assert approx_match(a, b) == approx_match(b, a)


@given(st.integers(0, 80), st.integers(0, 80), st.integers(0, 80))
def test_threshold_monotone(n1, n2, extra):
    t = edit_threshold("a" * n1, "b" * n2)
    assert edit_threshold("a" * (n1 + extra), "b" * n2) >= t
    assert t <= 10


def test_synonyms():
    store = SynonymStore([["US Virgin Islands", "United States Virgin Islands"], ["a", "b"], ["b", "c"]])
    assert are_synonyms("us virgin islands", "united states virgin islands", store)
    assert are_synonyms("zzz", "zzz", store)
    assert are_synonyms("a", "c", store)  # groups sharing a value merge
    assert not are_synonyms("a", "us virgin islands", store)
    assert len(store) == 2


def test_synonyms_from_tsv(tmp_path):
    p = tmp_path / "syn.tsv"
    p.write_text("South Korea\tKorea, South\tRepublic of Korea\n\nlonely\n", encoding="utf-8")
    store = SynonymStore.from_tsv(p)
    assert store.groups() == [["korea south", "republic of korea", "south korea"]]


def test_values_equivalent():
    store = SynonymStore([["south korea", "republic of korea"]])
    assert values_equivalent("kor", "kor")
    assert values_equivalent("south korea", "republic of korea", MatchConfig(), store)
    assert not values_equivalent("south korea", "republic of korea")
    assert not values_equivalent("international business machines", "general electric company")


@settings(max_examples=200)
@given(st.lists(st.text(alphabet="abcd ", min_size=0, max_size=16), max_size=30),
       st.sampled_from([MatchConfig(), MatchConfig(0.3, 2), EXACT]))
def test_value_index_matches_pairwise(values, cfg):
    store = SynonymStore([values[:2]]) if len(values) >= 2 else SynonymStore()
    idx = ValueIndex(values, cfg, store)
    for a in values:
        for b in values:
            assert idx.equivalent(a, b) == values_equivalent(a, b, cfg, store)
        assert idx.equivalents(a) == frozenset(v for v in values if values_equivalent(a, v, cfg, store))


def test_value_index_long_strings_and_unknown_queries():
    base = "abcdefghijklmnopqrstuvwxyz" * 2
    vals = [base, base[:-3] + "xyz", base[:-4], base[::-1]]
    idx = ValueIndex(vals)
    for a in vals + ["abcdefghijklmnopqrstuvwxyzabcdefghijklmnopqrstuvw"]:
        assert idx.equivalents(a) == frozenset(v for v in vals if values_equivalent(a, v))
