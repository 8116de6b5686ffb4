"""Command-line entry point: ``mapsynth <command> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import apps
from .compat import CompatibilityGraph, GraphConfig, GraphReport, build_graph
from .corpus import LoadStats, corpus_stats, load_corpus, normalize_cell
from .curate import export_mappings, load_mappings, rank_and_filter, score_cases
from .extract import ExtractConfig, ExtractReport, build_index, extract_candidates, read_candidates, write_candidates
from .generator import SyntheticSpec, benchmark_spec, generate_corpus
from .partition import Partitioning, partition_graph, read_partitions, write_partitions
from .pipeline import PipelineConfig, read_config_file, resolve_partitions, run_pipeline, write_resolved
from .strmatch import EMPTY_SYNONYMS, MatchConfig, SynonymStore


def _synonyms(path) -> SynonymStore:
    return SynonymStore.from_tsv(path) if path else EMPTY_SYNONYMS


def cmd_ingest(a):
    stats = LoadStats()
    tables = list(load_corpus(a.corpus, stats, normalize=a.normalize))
    info = {**corpus_stats(tables), "skipped": stats.skipped, "ragged_rows": stats.ragged_rows}
    if a.stats:
        for k, v in info.items():
            print(f"{k}\t{v}")
    return 0


def cmd_extract(a):
    tables = list(load_corpus(a.corpus, normalize=True))
    cfg = ExtractConfig(a.coherence_threshold, a.theta_fd, a.min_rows)
    idx = build_index(tables, a.workers)
    rep = ExtractReport()
    n = write_candidates(extract_candidates(tables, cfg, idx, rep), a.out)
    print(json.dumps(rep.summary()))
    return 0 if n >= 0 else 1


def cmd_graph(a):
    cands = read_candidates(a.candidates)
    cfg = GraphConfig(a.theta_overlap, a.theta_edge, a.tau, a.bucket_cap, not a.no_negative)
    rep = GraphReport()
    g = build_graph(cands, cfg, MatchConfig(a.f_ed, a.k_ed), _synonyms(a.synonyms), a.workers, rep)
    g.write_jsonl(a.out)
    print(json.dumps(rep.summary()))
    return 0


def cmd_synthesize(a):
    g = CompatibilityGraph.read_jsonl(a.graph)
    parts, info = partition_graph(g, a.tau, a.workers)
    write_partitions(parts, a.out)
    print(json.dumps({**info, "partitions": len(parts.parts)}))
    return 0


def cmd_resolve(a):
    cands = {c.id: c for c in read_candidates(a.candidates)}
    parts = Partitioning([tuple(m) for _, m in read_partitions(a.partitions)])
    res = resolve_partitions(parts, cands, MatchConfig(a.f_ed, a.k_ed), _synonyms(a.synonyms),
                             not a.no_resolve, a.workers)
    maps = write_resolved(res, a.out)
    print(json.dumps({"mappings": len(maps), "tables_removed": sum(len(r.removed) for r in res)}))
    return 0


def cmd_curate(a):
    cur = rank_and_filter(load_mappings(a.mappings), a.min_domains)
    export_mappings(cur, a.out, a.format)
    print(json.dumps({"curated": len(cur)}))
    return 0


def cmd_eval(a):
    rep = score_cases(load_mappings(a.mappings), load_mappings(a.truth))
    body = json.dumps(rep.to_json(), indent=2) + "\n"
    if a.report:
        Path(a.report).write_text(body)
    for c in rep.cases:
        print(f"{c.case_id}\t{c.mapping_id}\t{c.precision:.4f}\t{c.recall:.4f}\t{c.fscore:.4f}")
    m = rep.macro
    print(f"macro\t-\t{m['precision']:.4f}\t{m['recall']:.4f}\t{m['fscore']:.4f}")
    return 0


def _values(raw: list[str]) -> list[str]:
    return [normalize_cell(v) for v in raw]


def _pairs(raw: list[str]) -> list[tuple[str, str]]:
    out = []
    for item in raw:
        if "=" not in item:
            raise SystemExit(f"example {item!r} must look like key=value")
        k, v = item.split("=", 1)
        out.append((normalize_cell(k), normalize_cell(v)))
    return out


def _print_result(res: apps.LookupResult, header: str):
    if res.mapping_id is None:
        print(res.diagnostic, file=sys.stderr)
        return 1
    print(f"# mapping\t{res.mapping_id}")
    print(header)
    for row in res.rows:
        print("\t".join("" if x is None else str(x) for x in row))
    return 0


def cmd_lookup(a):
    store = apps.MappingStore(load_mappings(a.store))
    if a.action == "fill":
        return _print_result(apps.auto_fill(store, _pairs(a.example), _values(a.key)), "key\tvalue")
    if a.action == "correct":
        return _print_result(apps.auto_correct(store, _values(a.cell)), "index\tcell\tsuggestion")
    return _print_result(apps.auto_join_bridge(store, _values(a.left), _values(a.right), a.floor),
                         "left\tright")


def cmd_run(a):
    values = read_config_file(a.config) if a.config else {}
    for item in a.set or []:
        if "=" not in item:
            raise SystemExit(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        values[k.strip()] = v.strip()
    if a.workers is not None:
        values["workers"] = a.workers
    cfg = PipelineConfig().update(values)
    res = run_pipeline(cfg, a.corpus, a.out_dir)
    print(json.dumps({"curated": len(res.curated), "timings": res.report["timings"]}))
    return 0


def cmd_gen(a):
    spec = SyntheticSpec.from_json(json.loads(Path(a.spec).read_text())) if a.spec else benchmark_spec()
    paths = generate_corpus(spec, a.seed, a.out_dir)
    print(json.dumps({k: str(v) for k, v in paths.items()}))
    return 0


def _match_args(p):
    p.add_argument("--f-ed", type=float, default=0.2)
    p.add_argument("--k-ed", type=int, default=10)
    p.add_argument("--synonyms")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mapsynth")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a corpus and report counts")
    p.add_argument("--corpus", required=True)
    p.add_argument("--stats", action="store_true")
    p.add_argument("--normalize", action="store_true")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("extract", help="extract candidate two-column tables")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--coherence-threshold", type=float, default=0.0)
    p.add_argument("--theta-fd", type=float, default=0.95)
    p.add_argument("--min-rows", type=int, default=4)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("graph", help="build the compatibility graph")
    p.add_argument("--candidates", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--theta-overlap", type=int, default=2)
    p.add_argument("--theta-edge", type=float, default=0.85)
    p.add_argument("--tau", type=float, default=-0.2)
    p.add_argument("--bucket-cap", type=int, default=10_000)
    p.add_argument("--no-negative", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    _match_args(p)
    p.set_defaults(fn=cmd_graph)

    p = sub.add_parser("synthesize", help="partition the graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tau", type=float, default=-0.2)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_synthesize)

    p = sub.add_parser("resolve", help="resolve conflicts inside partitions")
    p.add_argument("--partitions", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-resolve", action="store_true", help="union partitions without removing tables")
    p.add_argument("--workers", type=int, default=1)
    _match_args(p)
    p.set_defaults(fn=cmd_resolve)

    p = sub.add_parser("curate", help="filter and rank mappings by popularity")
    p.add_argument("--mappings", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-domains", type=int, default=8)
    p.add_argument("--format", choices=["jsonl", "tsv"], default="jsonl")
    p.set_defaults(fn=cmd_curate)

    p = sub.add_parser("eval", help="score mappings against ground truth")
    p.add_argument("--mappings", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--report")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("lookup", help="auto-fill, auto-correct or auto-join over curated mappings")
    p.add_argument("action", choices=["fill", "correct", "join"])
    p.add_argument("--store", required=True)
    p.add_argument("--example", action="append", default=[], help="key=value (fill)")
    p.add_argument("--key", action="append", default=[], help="key to fill")
    p.add_argument("--cell", action="append", default=[], help="column cell (correct)")
    p.add_argument("--left", action="append", default=[], help="left key (join)")
    p.add_argument("--right", action="append", default=[], help="right key (join)")
    p.add_argument("--floor", type=float, default=0.5)
    p.set_defaults(fn=cmd_lookup)

    p = sub.add_parser("run", help="run the full pipeline")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", help="flat key = value file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--workers", type=int)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("gen", help="generate a synthetic corpus with ground truth")
    p.add_argument("--spec", help="JSON spec; default is the ten-mapping benchmark")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_gen)
    return ap


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return a.fn(a)


if __name__ == "__main__":
    sys.exit(main())
