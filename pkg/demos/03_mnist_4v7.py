"""MNIST 4-vs-7 with a fixed noisy copy of the training labels.

Needs the four standard IDX files; point at them with --mnist-dir or
MNIST_DIR. `disagreement fetch --mnist-dir DIR` downloads and checks them.

    python demos/03_mnist_4v7.py --mnist-dir ~/data/mnist --mu 0.3 --iters 200000
"""

import argparse
import logging

from disagreement.harness import ExperimentConfig, run_mnist47

ap = argparse.ArgumentParser()
ap.add_argument("--mnist-dir")
ap.add_argument("--mu", type=float, default=0.3)
ap.add_argument("--iters", type=int, default=200_000)
ap.add_argument("--warmup", type=int, default=60_000)
ap.add_argument("--out", default=None)
args = ap.parse_args()
logging.basicConfig(level=logging.INFO, format="%(message)s")

res = run_mnist47(ExperimentConfig("mnist47", mu=args.mu, N=args.iters, repeats=1, warmup_iters=args.warmup,
                                   mnist_dir=args.mnist_dir, output_dir=args.out))
for row in res.rows:
    print(f"{row.method:8s} best={row.best_accuracy:.4f} last100={row.mean_last_100_evals_accuracy:.4f} "
          f"updates={row.final_update_count}")
