"""Sup norm of u against beta at fixed eps, with the beta^(1/3) scaled value.

    python3 scripts/supnorm_scaling.py [--eps 0.1]
"""
import argparse

import numpy as np

from ostrovsky_lab.estimates import audit_supnorm_scaling
from ostrovsky_lab.nonlocal_terms import make_initial_data
from ostrovsky_lab.regularized import RegParams, simulate
from ostrovsky_lab.spectral import make_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--T", type=float, default=0.5)
    args = ap.parse_args()

    g = make_grid(args.n, 2 * np.pi)
    runs = []
    for beta in (0.01, 0.005, 0.0025, 0.00125, 0.000625):
        init = make_initial_data("sine", g, args.eps, beta)
        tr = simulate(init, RegParams(args.eps, beta, 1.0), args.T)
        linf = float(np.max(np.abs(tr.u)))
        runs.append((beta, linf))
        print(f"beta={beta:<10g} sup|u|={linf:.5f} beta^(1/3) sup|u|={beta ** (1 / 3) * linf:.5f}")
    print(f"max scaled value {audit_supnorm_scaling(runs):.5f}")


if __name__ == "__main__":
    main()
