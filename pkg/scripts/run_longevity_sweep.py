#!/usr/bin/env python3
"""Sweep the initial amplitude and report doubling times of the H^k norm plus
the weighted profile norms, the qualitative content of the small-data theory."""

import argparse

from bplab.diagnostics import doubling_time, weighted_norm_series
from bplab.solver import SimConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.2, 0.1, 0.05])
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--L", type=float, default=50.0)
    ap.add_argument("--t-end", type=float, default=50.0)
    ap.add_argument("--dt", type=float, default=0.05)
    ap.add_argument("--k", type=int, default=4)
    args = ap.parse_args()

    for eps in args.eps:
        cfg = SimConfig(n=args.n, box_length=args.L, dt=args.dt, t_end=args.t_end,
                        eps=eps, init="pair", k_energy=args.k, output_stride=20)
        res = run(cfg)
        if res.aborted:
            print(f"eps={eps:g}: aborted ({res.abort_reason})")
            continue
        ts = [r.t for r in res.reports]
        hks = [r.hk for r in res.reports]
        td = doubling_time(ts, hks, t_end=cfg.t_end)
        rows = weighted_norm_series(res)
        w2g = max(r["weighted2"] for r in rows) / rows[0]["weighted2"]
        w3g = max(r["weighted3"] for r in rows) / rows[0]["weighted3"]
        print(f"eps={eps:g}: T_double(H{args.k}) = {td:.2f} "
              f"(censored at {cfg.t_end:g}), weighted growth x{w2g:.2f}/x{w3g:.2f}")


if __name__ == "__main__":
    main()
