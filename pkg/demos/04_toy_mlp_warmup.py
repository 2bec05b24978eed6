"""Warm-started, reweighted disagreement training for a small MLP.

Two 784-64-1 networks train normally for the warm-up, then only on the
examples of each 128-batch where they disagree. Batches with few
disagreements get a proportionally smaller step. A single network trained
on every batch overfits the flipped labels as training goes on.
"""

import argparse

from disagreement.harness import ExperimentConfig, run_toy_mlp

ap = argparse.ArgumentParser()
ap.add_argument("--mnist-dir")
ap.add_argument("--mu", type=float, default=0.4)
ap.add_argument("--iters", type=int, default=8000)
ap.add_argument("--warmup", type=int, default=2000)
args = ap.parse_args()

res = run_toy_mlp(ExperimentConfig("toy-mlp", mu=args.mu, repeats=1, N=args.iters, warmup_iters=args.warmup,
                                   eval_period=500, mnist_dir=args.mnist_dir))
for method in ("ours", "vanilla"):
    its, curve = res.curves(method, args.mu)
    print(method, " ".join(f"{a:.3f}" for a in curve))
for row in res.rows:
    print(f"{row.method}: updates {row.final_update_count} over {args.iters} iterations")
