#!/usr/bin/env python3
"""Run the full residual verification (one-matrix and two-matrix cases).

Equivalent to `hardedge verify m1` followed by `hardedge verify m2-special`;
exits non-zero if any residual category misses its tolerance.
"""

import argparse
import sys

from hardedge.cli import main as cli_main


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s-max", type=float, default=5.0)
    ap.add_argument("--tol", type=float, default=1e-10)
    ap.add_argument("--out", default="out/verify")
    args = ap.parse_args(argv)
    worst = 0
    for case in ("m1", "m2-special"):
        print(f"=== case {case} ===")
        rc = cli_main(["verify", case, "--s-max", str(args.s_max),
                       "--tol", str(args.tol), "--out", args.out])
        worst = max(worst, rc)
    return worst


if __name__ == "__main__":
    sys.exit(run())
