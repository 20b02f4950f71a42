"""Run the two eps-sweeps (beta = eps^2 and beta = eps^3) and print the tables.

    python3 scripts/run_acceptance_sweeps.py [--out DIR] [--threads N]

Writes table.csv, table.json and err_*.dat for each coupling under DIR.
"""
import argparse
import math
import time
from pathlib import Path

from ostrovsky_lab.convergence import NORMS, SweepConfig, Window, run_sweep
from ostrovsky_lab.regularized import Coupling
from ostrovsky_lab.spectral import make_grid

EPS = (0.1, 0.05, 0.025, 0.0125, 0.00625)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="sweeps")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--n", type=int, default=512)
    args = ap.parse_args()

    for p in (2, 3):
        cfg = SweepConfig(EPS, Coupling(1.0, p), 1.0, 1.5, make_grid(args.n, 2 * math.pi), "sine", "self",
                          window=Window(0.15, 1.5))
        t0 = time.perf_counter()
        table = run_sweep(cfg, threads=args.threads)
        elapsed = time.perf_counter() - t0
        out = Path(args.out) / f"p{p}"
        out.mkdir(parents=True, exist_ok=True)
        table.write_csv(out / "table.csv")
        table.write_json(out / "table.json")
        table.write_plot_files(out)

        print(f"\nbeta = eps^{p}  ({elapsed:.1f} s, reference: {table.reference_label})")
        print("eps        " + " ".join(f"{n:>11s}" for n in NORMS) + "   order  I4")
        for r in table.rows:
            errs = " ".join(f"{r.err(n):11.3e}" for n in NORMS)
            order = "   -  " if r.observed_order is None else f"{r.observed_order:6.2f}"
            i4 = r.audit.summary["dissipation_terms"][3] if r.audit else float("nan")
            print(f"{r.eps:<10g} {errs} {order} {i4:.2e}")
        print(f"regime_ok={table.regime_ok} monotone_ok={table.monotone_ok()} passed={table.passed}")
        for tag, c in table.checks.items():
            if not c["pass"]:
                print(f"  failed: {tag}")


if __name__ == "__main__":
    main()
