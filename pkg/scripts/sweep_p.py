"""Minimal p-energy and fixed-point residual over a grid of p for one config.

    python3 scripts/sweep_p.py configs/polydisc.cfg --pmin 0.25 --pmax 1.75 --steps 7
"""

import argparse

import numpy as np

from lpext.config import build_instance, load_config
from lpext.irls import IrlsSchedule, fixed_point_residual, irls_solve
from lpext.lp_solver import default_starts, objective, solve_lp_direct


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--pmin", type=float, default=0.25)
    ap.add_argument("--pmax", type=float, default=1.75)
    ap.add_argument("--steps", type=int, default=7)
    args = ap.parse_args()

    cfg = load_config(args.config)
    print(f"{'p':>6} {'m_p direct':>20} {'m_p irls':>20} {'fixed point':>12} {'irls it':>8}")
    for p in np.linspace(args.pmin, args.pmax, args.steps):
        prob = build_instance(cfg, p=float(p)).problem
        F_d, _ = solve_lp_direct(prob, default_starts(prob, cfg.starts, cfg.seed))
        F_i, cert, _ = irls_solve(prob, schedule=IrlsSchedule(max_iter=cfg.irls_max_iter),
                                  reference=F_d)
        print(f"{p:6.3f} {objective(F_d.coeffs, prob, 0.0):20.15f} "
              f"{objective(F_i.coeffs, prob, 0.0):20.15f} "
              f"{fixed_point_residual(F_d, prob):12.3e} {cert.iterations:8d}")


if __name__ == "__main__":
    main()
