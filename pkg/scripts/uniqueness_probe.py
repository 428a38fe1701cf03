"""Probe whether the minimiser is unique for 0 < p < 1.

Descends from many seeded starts and clusters the limits.  The output is a
record of what was seen, not a claim: one cluster means no second minimiser
was found from these starts.

    python3 scripts/uniqueness_probe.py configs/points.cfg --p 0.3 0.5 0.8 --trials 16
"""

import argparse
import json

import numpy as np

from lpext.config import build_instance, load_config
from lpext.lp_solver import uniqueness_probe


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("configs", nargs="+")
    ap.add_argument("--p", type=float, nargs="+", default=[0.5])
    ap.add_argument("--trials", type=int, default=8)
    ap.add_argument("--radius", type=float, default=1e-4)
    args = ap.parse_args()

    records = []
    for path in args.configs:
        cfg = load_config(path)
        for p in args.p:
            rep = uniqueness_probe(build_instance(cfg, p=p).problem, args.trials, cfg.seed,
                                   radius=args.radius)
            records.append({
                "config": cfg.name, "p": p, "trials": rep.trials, "clusters": rep.count,
                "dispersion": rep.dispersion,
                "objectives": [cl["objective"] for cl in rep.clusters],
                "members": [cl["members"] for cl in rep.clusters],
                "representatives": [[[z.real, z.imag] for z in np.asarray(cl["coeffs"])]
                                    for cl in rep.clusters],
            })
            print(f"{cfg.name:14s} p={p:<5g} clusters={rep.count} "
                  f"dispersion={rep.dispersion:.2e}")
    print(json.dumps(records, indent=1))


if __name__ == "__main__":
    main()
