"""Produce the data and plots for all four figure scenarios.

Usage: python3 scripts/run_figures.py [OUTDIR] [--quick]

--quick cuts trajectory counts and horizons so the whole set finishes in
well under a minute; without it the defaults of each scenario are used.
"""

import argparse
import sys
import time

from tlsrelax.cli import main as cli_main

QUICK = {
    "fig1": ["--ntraj", "2000", "--tmax", "10"],
    "fig2": ["--ntraj", "2000", "--tmax", "10"],
    "fig3": ["--method", "pde", "--tmax", "200"],
    "pointer": ["--ntraj", "2000", "--tmax", "100"],
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir", nargs="?", default="figures")
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--seed", default="1")
    args = ap.parse_args(argv)
    status = 0
    for name in ("fig1", "fig2", "fig3", "pointer"):
        extra = QUICK[name] if args.quick else []
        t0 = time.perf_counter()
        rc = cli_main([name, "--out", f"{args.outdir}/{name}", "--seed", args.seed, *extra])
        print(f"{name}: exit {rc} in {time.perf_counter() - t0:.1f} s", file=sys.stderr)
        status = status or rc
    return status


if __name__ == "__main__":
    sys.exit(main())
