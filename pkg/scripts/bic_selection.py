"""How often the BIC grid picks the generating order at the acquisition length.

Writes the selection frequency matrix for each generator as CSV (rows p,
columns q).

    python scripts/bic_selection.py --seeds 50 --out results/bic
"""

import argparse
from pathlib import Path

import numpy as np

from aewear.arma import ArmaSpec, bic_grid_search, simulate_arma
from aewear.formats import atomic_write_text
from aewear.numerics import derive_seed, rng
from aewear.synth import published_background

GENERATORS = {
    "ar1": lambda n, s: simulate_arma(published_background(), n, s),
    "white": lambda n, s: rng(derive_seed(s, 7)).normal(30.0, 1.5, n),
    "arma11": lambda n, s: simulate_arma(ArmaSpec((0.6,), (0.4,), 10.0, 1.0), n, s),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--n", type=int, default=409)
    ap.add_argument("--grid", type=int, default=5)
    ap.add_argument("--out", type=Path, default=Path("results/bic"))
    args = ap.parse_args()

    for name, gen in GENERATORS.items():
        counts = np.zeros((args.grid + 1, args.grid + 1), dtype=int)
        failed = 0
        for seed in range(args.seeds):
            grid = bic_grid_search(gen(args.n, seed), args.grid, args.grid)
            counts[grid.best] += 1
            failed += len(grid.errors)
        p, q = np.unravel_index(counts.argmax(), counts.shape)
        print(f"{name:7s} modal choice ({p},{q}) in {counts.max()}/{args.seeds} seeds; "
              f"{failed} failed cells")
        header = "p," + ",".join(f"q{j}" for j in range(args.grid + 1))
        body = "\n".join(f"{i}," + ",".join(map(str, row)) for i, row in enumerate(counts))
        atomic_write_text(args.out / f"selection_{name}.csv", header + "\n" + body + "\n")


if __name__ == "__main__":
    main()
