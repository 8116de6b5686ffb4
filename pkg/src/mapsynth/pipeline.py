"""End-to-end orchestration: extract, graph, partition, resolve, curate.

Every stage materializes its output as JSON-lines in the output directory,
so stages can be rerun or inspected individually.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

from .compat import CompatibilityGraph, GraphConfig, GraphReport, build_graph
from .corpus import LoadStats, load_corpus
from .curate import SynthesizedMapping, compute_stats, export_mappings, is_numeric_mapping, rank_and_filter
from .extract import CandidateTable, ExtractConfig, ExtractReport, build_index, extract_candidates, write_candidates
from .parallel import pmap
from .partition import Partitioning, partition_graph, write_partitions
from .resolve import ResolvedPartition, resolve_conflicts
from .strmatch import EMPTY_SYNONYMS, MatchConfig, SynonymStore

log = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    coherence_threshold: float = 0.0
    theta_fd: float = 0.95
    min_rows: int = 4
    max_coherence_values: int = 200
    f_ed: float = 0.2
    k_ed: int = 10
    theta_overlap: int = 2
    theta_edge: float = 0.85
    tau: float = -0.2
    bucket_cap: int = 10_000
    use_negative: bool = True
    resolve: bool = True
    min_domains: int = 8
    workers: int = 1
    synonyms: str | None = None

    def extract_config(self) -> ExtractConfig:
        return ExtractConfig(self.coherence_threshold, self.theta_fd, self.min_rows, self.max_coherence_values)

    def match_config(self) -> MatchConfig:
        return MatchConfig(self.f_ed, self.k_ed)

    def graph_config(self) -> GraphConfig:
        return GraphConfig(self.theta_overlap, self.theta_edge, self.tau, self.bucket_cap, self.use_negative)

    def load_synonyms(self) -> SynonymStore:
        return SynonymStore.from_tsv(self.synonyms) if self.synonyms else EMPTY_SYNONYMS

    def validate(self) -> None:
        self.extract_config()
        self.match_config()
        self.graph_config()
        if self.min_domains < 0 or self.workers < 1:
            raise ValueError("need min_domains >= 0 and workers >= 1")

    def update(self, values: dict) -> "PipelineConfig":
        """Copy with string or typed overrides applied (unknown keys rejected)."""
        fields = {f.name: f for f in dataclasses.fields(self)}
        changes = {}
        for key, raw in values.items():
            name = key.replace("-", "_")
            if name not in fields:
                raise ValueError(f"unknown config key {key!r}")
            changes[name] = _coerce(raw, getattr(self, name), name)
        out = dataclasses.replace(self, **changes)
        out.validate()
        return out


def _coerce(raw, current, name):
    if not isinstance(raw, str):
        return raw
    if name == "synonyms":
        return raw or None
    if isinstance(current, bool):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    return raw


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value.strip("\"'")
    return out


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage


def _resolve_job(args):
    pid, members, mcfg, syn, enabled = args
    if not enabled:
        return ResolvedPartition(list(members), [], pid)
    return resolve_conflicts(members, mcfg, syn, partition_id=pid)


def resolve_partitions(parts: Partitioning, candidates: dict[str, CandidateTable],
                       mcfg: MatchConfig = MatchConfig(), synonyms: SynonymStore = EMPTY_SYNONYMS,
                       enabled: bool = True, workers: int = 1) -> list[ResolvedPartition]:
    jobs = [(f"p{k:06d}", [candidates[v] for v in part], mcfg, synonyms, enabled)
            for k, part in enumerate(parts.parts)]
    return pmap(_resolve_job, jobs, workers)


def write_resolved(resolved: list[ResolvedPartition], path) -> list[SynthesizedMapping]:
    mappings = [m for m in (compute_stats(r) for r in resolved) if m is not None]
    export_mappings(mappings, path)
    return mappings


@dataclass
class RunResult:
    curated: list[SynthesizedMapping]
    mappings: list[SynthesizedMapping]
    report: dict


def run_pipeline(cfg: PipelineConfig, corpus_path, out_dir) -> RunResult:
    """Run every stage over ``corpus_path``, writing artifacts into ``out_dir``."""
    cfg.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timings: dict[str, float] = {}
    report: dict = {"config": dataclasses.asdict(cfg), "timings": timings}
    mcfg = cfg.match_config()

    def stage(name, fn):
        t0 = time.perf_counter()
        try:
            return fn()
        except Exception as exc:
            (out / "report.json").write_text(json.dumps({**report, "failed_stage": name}, indent=2) + "\n")
            raise StageError(name, exc) from exc
        finally:
            timings[name] = round(time.perf_counter() - t0, 4)

    load_stats = LoadStats()
    syn, tables = stage("load", lambda: (cfg.load_synonyms(),
                                         list(load_corpus(corpus_path, load_stats, normalize=True))))
    report["load"] = dataclasses.asdict(load_stats)

    ex_report = ExtractReport()

    def extract():
        idx = build_index(tables, cfg.workers)
        cands = list(extract_candidates(tables, cfg.extract_config(), idx, ex_report))
        write_candidates(cands, out / "candidates.jsonl")
        return cands

    cands = stage("extract", extract)
    report["extract"] = ex_report.summary()

    g_report = GraphReport()

    def graph():
        g = build_graph(cands, cfg.graph_config(), mcfg, syn, cfg.workers, g_report)
        g.write_jsonl(out / "graph.jsonl")
        return g

    g: CompatibilityGraph = stage("graph", graph)
    report["graph"] = g_report.summary()

    def synthesize():
        parts, info = partition_graph(g, cfg.tau, cfg.workers)
        write_partitions(parts, out / "partitions.jsonl")
        return parts, info

    parts, info = stage("partition", synthesize)
    report["partition"] = {**info, "partitions": len(parts.parts)}

    by_id = {c.id: c for c in cands}

    def resolve():
        res = resolve_partitions(parts, by_id, mcfg, syn, cfg.resolve, cfg.workers)
        return res, write_resolved(res, out / "mappings.jsonl")

    resolved, mappings = stage("resolve", resolve)
    report["resolve"] = {
        "enabled": cfg.resolve,
        "tables_removed": sum(len(r.removed) for r in resolved),
    }

    def curate():
        cur = rank_and_filter(mappings, cfg.min_domains)
        export_mappings(cur, out / "curated.jsonl")
        return cur

    curated = stage("curate", curate)
    report["curate"] = {
        "mappings": len(mappings),
        "curated": len(curated),
        "numeric_curated": sum(is_numeric_mapping(m) for m in curated),
    }
    report["total_seconds"] = round(sum(timings.values()), 4)
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    return RunResult(curated, mappings, report)
