"""Trained vs random Hessian power-law verdicts for the tiny classifier, over many seeds.

    python scripts/mlp_contrast.py --seeds 20
"""

import argparse
import json

import numpy as np

from powerspec.mlp import spectrum_contrast


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--k", type=int, default=100)
    ap.add_argument("--alpha", type=float, default=0.05)
    ap.add_argument("--json", help="write per-seed reports here")
    args = ap.parse_args()

    reports = []
    for seed in range(args.seeds):
        r = spectrum_contrast(seed, args.alpha, args.k)
        reports.append(r)
        print(f"seed {seed:3d}  random d_ks={r.random.d_ks:.4f} {'accept' if r.random.accept else 'reject'}  "
              f"trained d_ks={r.trained.d_ks:.4f} {'accept' if r.trained.accept else 'reject'} "
              f"(loss {r.trained.loss:.3f}, s_hat {r.trained.s_hat})")

    d_c = reports[0].d_c
    for arm in ("random", "trained"):
        d = np.array([getattr(r, arm).d_ks for r in reports])
        acc = sum(getattr(r, arm).accept for r in reports)
        print(f"{arm:8s} accepts {acc}/{len(reports)}  median d_ks {np.median(d):.4f}  (d_c {d_c:.4f})")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([r.as_dict() for r in reports], fh, indent=2)


if __name__ == "__main__":
    main()
