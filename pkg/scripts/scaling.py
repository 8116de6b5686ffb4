"""Runtime scaling on nested samples of a synthetic corpus.

Runs the pipeline on growing prefixes of a shuffled corpus and fits the
log-log slope of runtime against table count.

    python scripts/scaling.py --tables 10000 --out-dir /tmp/scale
"""
import argparse
import random
import shutil
import time
from pathlib import Path

import numpy as np

from mapsynth.corpus import load_corpus, write_corpus
from mapsynth.generator import generate_corpus, scaling_spec
from mapsynth.pipeline import PipelineConfig, run_pipeline


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tables", type=int, default=10_000)
    ap.add_argument("--mappings", type=int, default=400)
    ap.add_argument("--fractions", type=float, nargs="+", default=[0.2, 0.4, 0.6, 0.8, 1.0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-dir", default="scale_out")
    ap.add_argument("--keep", action="store_true", help="keep per-sample pipeline outputs")
    a = ap.parse_args()

    out = Path(a.out_dir)
    paths = generate_corpus(scaling_spec(a.tables, a.mappings, a.seed), a.seed, out / "data")
    tables = list(load_corpus(paths["corpus"]))
    random.Random(a.seed).shuffle(tables)
    sizes, secs = [], []
    print(f"{'tables':>8} {'seconds':>9}  stages")
    for frac in a.fractions:
        n = int(len(tables) * frac)
        corpus = out / f"sample{n}.jsonl"
        write_corpus(tables[:n], corpus)
        t0 = time.perf_counter()
        res = run_pipeline(PipelineConfig(workers=a.workers), corpus, out / f"run{n}")
        secs.append(time.perf_counter() - t0)
        sizes.append(n)
        stages = " ".join(f"{k}={v:.1f}" for k, v in res.report["timings"].items())
        print(f"{n:8d} {secs[-1]:9.2f}  {stages}")
        if not a.keep:
            shutil.rmtree(out / f"run{n}")
    if len(sizes) >= 2:
        slope = np.polyfit(np.log(sizes), np.log(secs), 1)[0]
        print(f"fitted exponent: {slope:.3f}")


if __name__ == "__main__":
    main()
