"""m_p against the degree cap D on the bidisc, compared with the closed form.

On the unit bidisc with S = {z2 = 0}, f = 1 + z1 and phi = 0 the minimiser is
1 + z1 itself, so m_p = pi * int_D |1 + z|^p = pi^2 sum_k |binom(p/2, k)|^2 / (k + 1).
The remaining error comes from the quadrature, since |1 + z|^p is not a
polynomial; raising the order shrinks it.

    python3 scripts/degree_convergence.py --p 0.5 1.5 --degrees 1 2 4 6 --orders 6 12
"""

import argparse
import math

import numpy as np
from scipy.special import binom

from lpext.config import build_instance, load_config
from lpext.lp_solver import default_starts, objective, solve_lp_direct


def closed_form(p, terms=200_000):
    k = np.arange(terms)
    return math.pi ** 2 * float(np.sum(binom(p / 2, k) ** 2 / (k + 1)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/polydisc.cfg")
    ap.add_argument("--p", type=float, nargs="+", default=[0.5, 1.0, 1.5])
    ap.add_argument("--degrees", type=int, nargs="+", default=[1, 2, 4, 6])
    ap.add_argument("--orders", type=int, nargs="+", default=[6, 12])
    args = ap.parse_args()

    base = load_config(args.config)
    print(f"{'p':>5} {'D':>3} {'order':>5} {'m_p':>20} {'closed form':>20} {'rel err':>10}")
    for p in args.p:
        exact = closed_form(p)
        for order in args.orders:
            for D in args.degrees:
                cfg = base.with_overrides(p=p, degree=D, order=order)
                prob = build_instance(cfg).problem
                F, _ = solve_lp_direct(prob, default_starts(prob, cfg.starts, cfg.seed))
                m = objective(F.coeffs, prob, 0.0)
                print(f"{p:5.2f} {D:3d} {order:5d} {m:20.15f} {exact:20.15f} "
                      f"{abs(m - exact) / exact:10.2e}")


if __name__ == "__main__":
    main()
