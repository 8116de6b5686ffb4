"""Synthetic end-to-end benchmark with ablations.

Generates the ten-mapping benchmark corpus, runs the pipeline under the
default config and each ablation, and prints per-case and macro scores.

    python scripts/benchmark.py --seed 1 --out-dir /tmp/bench
"""
import argparse
import json
from pathlib import Path

from mapsynth.curate import load_mappings, score_cases
from mapsynth.generator import benchmark_spec, generate_corpus
from mapsynth.pipeline import PipelineConfig, run_pipeline

VARIANTS = {
    "default": {},
    "no_negative": {"use_negative": False},
    "no_resolve": {"resolve": False},
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--tables", type=int, default=2000)
    ap.add_argument("--noise", type=float, default=0.02)
    ap.add_argument("--out-dir", default="bench_out")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--per-case", action="store_true", help="print every benchmark case")
    a = ap.parse_args()

    out = Path(a.out_dir)
    paths = generate_corpus(benchmark_spec(a.tables, a.noise), a.seed, out / "data")
    truth = load_mappings(paths["truth"])
    summary = {}
    print(f"{'variant':<12} {'P':>7} {'R':>7} {'F':>7} {'curated':>8} {'seconds':>8}")
    for name, overrides in VARIANTS.items():
        cfg = PipelineConfig(workers=a.workers).update(overrides)
        res = run_pipeline(cfg, paths["corpus"], out / name)
        rep = score_cases(res.curated, truth)
        m = rep.macro
        print(f"{name:<12} {m['precision']:7.4f} {m['recall']:7.4f} {m['fscore']:7.4f} "
              f"{len(res.curated):8d} {res.report['total_seconds']:8.1f}")
        if a.per_case:
            for c in rep.cases:
                print(f"    {c.case_id:<16} {c.mapping_id or '-':<9} {c.precision:.3f} {c.recall:.3f} {c.fscore:.3f}")
        summary[name] = {**m, "curated": len(res.curated), "seconds": res.report["total_seconds"]}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")


if __name__ == "__main__":
    main()
