"""Kruzhkov residuals of the finite-volume limit solver and of a central-flux control.

    python3 scripts/entropy_reference.py [--n 1024] [--T 3.0]

Prints the residual for each of the nine levels k at several mollifier widths.
The central-flux control is run up to just before it breaks down.
"""
import argparse

import numpy as np

from ostrovsky_lab.errors import BlowUp
from ostrovsky_lab.limit import entropy_residual, fv_simulate, kruzhkov_levels, tol_entropy
from ostrovsky_lab.spectral import make_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1024)
    ap.add_argument("--T", type=float, default=3.0)
    ap.add_argument("--control-T", type=float, default=2.0)
    args = ap.parse_args()

    g = make_grid(args.n, 2 * np.pi)
    u0 = np.sin(g.x)
    tr = fv_simulate(u0, 0.0, args.T, 0.01, grid=g)
    tol = tol_entropy(tr)
    ks = kruzhkov_levels(u0)
    print(f"rusanov n={args.n} T={args.T} tol={tol:.3e}")
    try:
        ctrl = fv_simulate(u0, 0.0, args.control_T, 0.01, grid=g, scheme="central")
    except BlowUp as exc:
        print(f"central control blew up: {exc}")
        ctrl = None
    for w in (0.1, 0.2, 0.4):
        res = [entropy_residual(tr, float(k), w) for k in ks]
        line = f"w={w:<4} max={max(res):.3e} ({max(res) / tol:.2f} tol)"
        if ctrl is not None:
            c = max(entropy_residual(ctrl, float(k), w) for k in ks)
            line += f"  central={c:.3e} ({c / tol:.1f} tol)"
        print(line)
    mass = np.asarray(tr.meta["mass"])
    print(f"mass drift {np.max(np.abs(mass - mass[0])):.2e}")


if __name__ == "__main__":
    main()
