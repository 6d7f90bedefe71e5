#!/usr/bin/env python3
"""Run the Monte-Carlo inequality certifications at full sample counts and
print a one-line report per inequality id."""

import argparse

from bplab.harness import substream_seed
from bplab.resonance import certify_bound, certify_bound_constant_range


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--ids", default="abcdef")
    args = ap.parse_args()

    for iid in args.ids:
        rep = certify_bound(iid, args.n, seed=substream_seed(args.seed, f"certify-{iid}"))
        extra = ""
        if iid == "d":
            lo, hi = certify_bound_constant_range(iid, args.n, seed=args.seed)
            extra = f" ratio range [{lo:.4f}, {hi:.4f}]"
        print(f"id={iid}: {rep.violations}/{rep.samples} violations, "
              f"worst margin {rep.worst_margin:.3e}{extra}")


if __name__ == "__main__":
    main()
