#!/usr/bin/env python3
"""Offline N = 11 sampled reproduction of the spin-chain experiment.

Runs the XYZ (and optionally TFIM) sweep at 11 sites with per-timestep Pauli
sampling: each timestep draws strings until the estimator's standard error is
below the threshold, and the time series stops under the usual
1.96 sigma / sqrt(N_t) rule.

This is far outside the test budget on a laptop CPU (each Pauli sample costs
two 2048x2048 matrix products, and a full sweep point needs on the order of
10^4 samples); run it on a beefy machine or chunk the sweep values.  Not part
of the acceptance gate.

Example:
    python scripts/run_n11_sampled.py --model xyz --sweep Jz=0:0.5:1 \
        --seed 7 --out n11_xyz.csv
"""

import argparse
import sys

from paulient.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--model", default="xyz", choices=["xyz", "tfim"])
    parser.add_argument("--sweep", default="Jz=0:0.5:1")
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--out", default="n11_sampled.csv")
    parser.add_argument("--threshold", type=float, default=2e-2)
    parser.add_argument("--pe-sem-target", type=float, default=2e-2)
    parser.add_argument("--max-steps", type=int, default=20000)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()
    return cli_main([
        "spinchain-run",
        "--model", args.model,
        "--sweep", args.sweep,
        "--n", "11",
        "--mode", "sampled",
        "--seed", str(args.seed),
        "--threshold", str(args.threshold),
        "--pe-sem-target", str(args.pe_sem_target),
        "--max-steps", str(args.max_steps),
        "--workers", str(args.workers),
        "--out", args.out,
    ])


if __name__ == "__main__":
    sys.exit(main())
