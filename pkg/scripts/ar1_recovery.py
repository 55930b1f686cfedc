"""Recovery of the published AR(1) background by exact maximum likelihood.

    python scripts/ar1_recovery.py --seeds 100 --n 10000
"""

import argparse
import time

import numpy as np

from aewear.arma import ArmaSpec, fit_arma, simulate_arma
from aewear.synth import PUBLISHED_AR1


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--n", type=int, default=10000)
    ap.add_argument("--sigma", type=float, default=5.0)
    args = ap.parse_args()

    spec = ArmaSpec((PUBLISHED_AR1["ar1"],), (), PUBLISHED_AR1["intercept"], args.sigma ** 2)
    rows = []
    start = time.perf_counter()
    for seed in range(args.seeds):
        fit = fit_arma(simulate_arma(spec, args.n, seed), 1, 0)
        rows.append((fit.spec.intercept, fit.spec.ar_coeffs[0], *fit.std_errors, fit.sigma2))
    elapsed = time.perf_counter() - start
    c, phi, se_c, se_phi, s2 = np.array(rows).T

    print(f"{args.seeds} fits of AR(1) at n={args.n} in {elapsed:.1f}s")
    print(f"{'':10s}{'truth':>10s}{'mean':>10s}{'sd':>10s}{'mean se':>10s}{'cover3se':>10s}")
    for name, truth, est, se in (("intercept", spec.intercept, c, se_c),
                                 ("ar1", spec.ar_coeffs[0], phi, se_phi)):
        cover = np.mean(np.abs(est - truth) <= 3 * se)
        print(f"{name:10s}{truth:10.4f}{est.mean():10.4f}{est.std():10.4f}{se.mean():10.4f}"
              f"{cover:10.2f}")
    print(f"{'sigma2':10s}{spec.sigma2:10.4f}{s2.mean():10.4f}{s2.std():10.4f}")
    print(f"|ar1 - truth| <= 0.02 in {np.mean(np.abs(phi - spec.ar_coeffs[0]) <= 0.02):.2f} of seeds")


if __name__ == "__main__":
    main()
