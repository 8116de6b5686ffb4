"""Synthetic table corpora with known ground-truth mappings.

Each ground-truth mapping is fragmented into many small tables spread over
web domains. Popular entities carry several synonymous surface forms, and a
table consistently uses one naming style. Noise corrupts a fixed fraction
of rows: wrong right values, character typos, or right values borrowed from
an unrelated mapping.
"""
from __future__ import annotations

import json
import random
import string
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .corpus import TableRecord, normalize_cell, write_corpus
from .curate import SynthesizedMapping, export_mappings
from .strmatch import _deletions, approx_match

_CONS = "bcdfghjklmnprstvz"
_VOWELS = "aeiou"


@dataclass
class MappingSpec:
    name: str
    n_entities: int
    kind: str = "code"  # right side: "code", "name" or "category" (many-to-one)
    n_categories: int = 10
    share_lefts_with: str | None = None
    conflict_fraction: float = 0.5
    popular_fraction: float = 0.05
    n_variants: int = 3
    weight: float = 1.0
    n_domains: int | None = None
    left_header: str = "name"
    right_header: str = "code"


@dataclass
class SyntheticSpec:
    mappings: list[MappingSpec]
    n_tables: int = 2000
    n_domains: int = 20
    rows_min: int = 5
    rows_max: int = 40
    full_list_prob: float = 0.15
    style_weights: tuple[float, ...] = (0.7, 0.15, 0.15)
    noise_rate: float = 0.02
    noise_mix: dict = field(default_factory=lambda: {"wrong_value": 0.6, "typo": 0.2, "mixed": 0.2})
    swap_columns_prob: float = 0.3
    extra_column_prob: float = 0.2
    mixed_column_prob: float = 0.05
    footnote_prob: float = 0.02

    def validate(self) -> None:
        for name in ("full_list_prob", "noise_rate", "swap_columns_prob",
                     "extra_column_prob", "mixed_column_prob", "footnote_prob"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must be within [0, 1], got {v}")
        if any(w < 0 for w in self.noise_mix.values()) or (self.noise_rate and not sum(self.noise_mix.values())):
            raise ValueError("noise_mix weights must be non-negative and not all zero")
        if not self.mappings:
            raise ValueError("spec needs at least one mapping")
        if not 1 <= self.rows_min <= self.rows_max:
            raise ValueError("need 1 <= rows_min <= rows_max")
        if self.n_domains < 1 or self.n_tables < 0:
            raise ValueError("need n_domains >= 1 and n_tables >= 0")
        names = {m.name for m in self.mappings}
        if len(names) != len(self.mappings):
            raise ValueError("mapping names must be unique")
        for m in self.mappings:
            if m.kind not in ("code", "name", "category"):
                raise ValueError(f"mapping {m.name}: unknown kind {m.kind!r}")
            if not 0 <= m.conflict_fraction <= 1 or not 0 <= m.popular_fraction <= 1:
                raise ValueError(f"mapping {m.name}: fractions must be within [0, 1]")
            if m.share_lefts_with is not None and m.share_lefts_with not in names:
                raise ValueError(f"mapping {m.name}: unknown share_lefts_with {m.share_lefts_with!r}")
            if m.n_variants < 1 or m.n_entities < 1:
                raise ValueError(f"mapping {m.name}: need n_variants >= 1 and n_entities >= 1")

    def to_json(self) -> dict:
        d = asdict(self)
        d["style_weights"] = list(self.style_weights)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "SyntheticSpec":
        obj = dict(obj)
        obj["mappings"] = [MappingSpec(**m) for m in obj["mappings"]]
        if "style_weights" in obj:
            obj["style_weights"] = tuple(obj["style_weights"])
        spec = cls(**obj)
        spec.validate()
        return spec


class _Namer:
    """Random pronounceable names, pairwise far apart under approximate matching."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.used: set[str] = set()
        # claimed names keyed by their space-free forms with up to two deletions
        self.near: dict[str, list[str]] = {}

    def _word(self, lo=2, hi=3):
        return "".join(self.rng.choice(_CONS) + self.rng.choice(_VOWELS)
                       for _ in range(self.rng.randint(lo, hi)))

    def _clear(self, norm: str) -> bool:
        if norm in self.used:
            return False
        seen = set()
        for v in _deletions(norm.replace(" ", ""), 2):
            for other in self.near.get(v, ()):
                if other not in seen:
                    seen.add(other)
                    if approx_match(norm, other):
                        return False
        return True

    def claim(self, norm: str) -> None:
        self.used.add(norm)
        for v in _deletions(norm.replace(" ", ""), 2):
            self.near.setdefault(v, []).append(norm)

    def name(self, words=(1, 2)) -> str:
        while True:
            raw = " ".join(self._word().capitalize() for _ in range(self.rng.randint(*words)))
            norm = normalize_cell(raw)
            if self._clear(norm):
                self.claim(norm)
                return raw

    def code(self) -> str:
        tries = 0
        while True:
            tries += 1
            size = 3 if tries < 50 else 4
            raw = "".join(self.rng.choice(string.ascii_uppercase) for _ in range(size))
            if raw.lower() not in self.used:
                self.used.add(raw.lower())
                return raw

    def variants(self, base: str, n: int) -> list[str]:
        words = base.split()
        forms = [base]
        pool = [
            " ".join(reversed(words)) if len(words) > 1 else f"Republic of {base}",
            f"{base} Republic",
            f"The {base} Islands",
            f"{base} ({self._word(1, 1).upper()})",
            f"United {base}",
        ]
        for cand in pool:
            if len(forms) >= n:
                break
            norm = normalize_cell(cand)
            if norm not in self.used and all(normalize_cell(f) != norm for f in forms):
                self.claim(norm)
                forms.append(cand)
        while len(forms) < n:
            forms.append(self.name())
        return forms


@dataclass
class _Entity:
    forms: list[str]
    right: str


def _build_truth(spec: SyntheticSpec, rng: random.Random):
    namer = _Namer(rng)
    built: dict[str, list[_Entity]] = {}
    for m in spec.mappings:
        if m.share_lefts_with is not None:
            base = built[m.share_lefts_with]
            ents = []
            for e in base:
                right = e.right
                if rng.random() < m.conflict_fraction:
                    right = namer.code() if m.kind == "code" else namer.name()
                ents.append(_Entity(e.forms, right))
            built[m.name] = ents
            continue
        categories = [namer.name((1, 1)) for _ in range(m.n_categories)] if m.kind == "category" else []
        ents = []
        n_popular = round(m.popular_fraction * m.n_entities)
        for k in range(m.n_entities):
            base = namer.name()
            forms = namer.variants(base, m.n_variants) if k < n_popular else [base]
            if m.kind == "code":
                right = namer.code()
            elif m.kind == "name":
                right = namer.name()
            else:
                right = categories[k % len(categories)]
            ents.append(_Entity(forms, right))
        built[m.name] = ents
    return built


def _typo(rng: random.Random, value: str) -> str:
    letters = [i for i, ch in enumerate(value) if ch.isalpha()]
    if not letters:
        return value + "x"
    i = rng.choice(letters)
    ch = value[i]
    pool = string.ascii_uppercase if ch.isupper() else string.ascii_lowercase
    new = rng.choice([c for c in pool if c.lower() != ch.lower()])
    return value[:i] + new + value[i + 1:]


def generate_tables(spec: SyntheticSpec, seed: int):
    """Build (tables, truth mappings, synonym groups) deterministically from ``seed``."""
    spec.validate()
    rng = random.Random(seed)
    truth = _build_truth(spec, rng)
    domains = [f"site{d:02d}.example" for d in range(spec.n_domains)]
    mapping_domains = {}
    for m in spec.mappings:
        k = min(m.n_domains or spec.n_domains, spec.n_domains)
        mapping_domains[m.name] = sorted(rng.sample(domains, k))
    names = [m.name for m in spec.mappings]
    weights = [m.weight for m in spec.mappings]
    mspec = {m.name: m for m in spec.mappings}
    all_rights = [e.right for ents in truth.values() for e in ents]
    noise_kinds = sorted(spec.noise_mix)
    noise_w = [spec.noise_mix[k] for k in noise_kinds]
    tables = []
    for t in range(spec.n_tables):
        mname = rng.choices(names, weights)[0]
        m = mspec[mname]
        ents = truth[mname]
        domain = rng.choice(mapping_domains[mname])
        style = rng.choices(range(len(spec.style_weights)), spec.style_weights)[0]
        if rng.random() < spec.full_list_prob:
            chosen = list(ents)
        else:
            size = min(len(ents), rng.randint(spec.rows_min, spec.rows_max))
            chosen = rng.sample(ents, size)
        rights = [e.right for e in ents]
        rows = []
        for e in chosen:
            left = e.forms[min(style, len(e.forms) - 1)]
            right = e.right
            if rng.random() < spec.noise_rate:
                kind = rng.choices(noise_kinds, noise_w)[0]
                if kind == "wrong_value":
                    right = rng.choice([r for r in rights if r != e.right] or [right + "x"])
                elif kind == "typo":
                    if rng.random() < 0.5:
                        left = _typo(rng, left)
                    else:
                        right = _typo(rng, right)
                elif kind == "mixed":
                    right = rng.choice(all_rights)
            if rng.random() < spec.footnote_prob:
                left = f"{left} [{rng.randint(1, 9)}]"
            rows.append([left, right])
        rng.shuffle(rows)
        headers = [m.left_header, m.right_header]
        if rng.random() < spec.extra_column_prob:
            headers.append("population")
            for row in rows:
                row.append(str(rng.randint(1000, 10_000_000)))
        if rng.random() < spec.mixed_column_prob:
            headers.append("notes")
            for row in rows:
                row.append(rng.choice(all_rights))
        if rng.random() < spec.swap_columns_prob:
            headers[0], headers[1] = headers[1], headers[0]
            for row in rows:
                row[0], row[1] = row[1], row[0]
        tables.append(TableRecord(f"t{t:06d}", domain, tuple(headers), tuple(tuple(r) for r in rows)))
    truth_maps = []
    synonyms = []
    for m in spec.mappings:
        pairs = set()
        for e in truth[m.name]:
            for f in e.forms:
                pairs.add((normalize_cell(f), normalize_cell(e.right)))
            if len(e.forms) > 1 and m.share_lefts_with is None:
                synonyms.append([normalize_cell(f) for f in e.forms])
        truth_maps.append(SynthesizedMapping(m.name, tuple(pairs), 0, len(mapping_domains[m.name])))
    return tables, truth_maps, synonyms


def generate_corpus(spec: SyntheticSpec, seed: int, out_dir) -> dict[str, Path]:
    """Write ``corpus.jsonl``, ``truth.jsonl`` and ``synonyms.tsv`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tables, truth, synonyms = generate_tables(spec, seed)
    paths = {
        "corpus": out / "corpus.jsonl",
        "truth": out / "truth.jsonl",
        "synonyms": out / "synonyms.tsv",
        "spec": out / "spec.json",
    }
    write_corpus(tables, paths["corpus"])
    export_mappings(truth, paths["truth"])
    with paths["synonyms"].open("w", encoding="utf-8") as fh:
        for group in synonyms:
            fh.write("\t".join(group) + "\n")
    paths["spec"].write_text(json.dumps({"seed": seed, **spec.to_json()}, indent=2) + "\n")
    return paths


def benchmark_spec(n_tables: int = 2000, noise_rate: float = 0.02) -> SyntheticSpec:
    """Ten ground-truth mappings over 20 domains.

    Includes two country-code-like systems over the same entities that
    disagree on half of the codes, a many-to-one mapping, and popular
    entities with three surface forms each.
    """
    maps = [
        MappingSpec("country_ioc", 200, "code", popular_fraction=0.05, weight=1.2,
                    left_header="country", right_header="ioc"),
        MappingSpec("country_iso", 200, "code", share_lefts_with="country_ioc",
                    conflict_fraction=0.5, weight=1.2, left_header="country", right_header="iso"),
        MappingSpec("city_state", 160, "category", n_categories=16, popular_fraction=0.05,
                    left_header="city", right_header="state"),
        MappingSpec("airport_iata", 180, "code", popular_fraction=0.05,
                    left_header="airport", right_header="iata"),
        MappingSpec("company_ticker", 150, "code", popular_fraction=0.06,
                    left_header="company", right_header="ticker"),
        MappingSpec("element_symbol", 100, "code", popular_fraction=0.05,
                    left_header="element", right_header="symbol"),
        MappingSpec("team_stadium", 80, "name", popular_fraction=0.05,
                    left_header="team", right_header="stadium"),
        MappingSpec("currency_code", 120, "code", popular_fraction=0.05,
                    left_header="currency", right_header="code"),
        MappingSpec("county_country", 140, "category", n_categories=4, popular_fraction=0.05,
                    left_header="county", right_header="country"),
        MappingSpec("car_make", 120, "category", n_categories=12, popular_fraction=0.05,
                    left_header="model", right_header="make"),
    ]
    return SyntheticSpec(mappings=maps, n_tables=n_tables, n_domains=20, noise_rate=noise_rate)


def scaling_spec(n_tables: int = 10_000, n_mappings: int = 400, seed: int = 0) -> SyntheticSpec:
    """Many small mappings with a long-tailed table share, for runtime scaling."""
    rng = random.Random(seed)
    maps = []
    for k in range(n_mappings):
        kind = rng.choice(["code", "name", "category"])
        maps.append(MappingSpec(
            f"m{k:04d}", rng.randint(20, 80), kind, n_categories=rng.randint(3, 10),
            popular_fraction=0.05, weight=1.0 / (k + 10), n_domains=rng.randint(2, 20),
        ))
    return SyntheticSpec(mappings=maps, n_tables=n_tables, n_domains=50, rows_min=5, rows_max=30,
                         full_list_prob=0.1)
