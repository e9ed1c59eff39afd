"""Coarse-versus-fine L2 differences for the channel problem before the shock.

    python3 scripts/channel_self_convergence.py --degree 3 --elements 16 32 64 --t-end 20000
"""

import argparse

import numpy as np

from exnerdg.app.scenarios import channel_scenario
from exnerdg.dgsem import Semidiscretization, evaluate_field, interpolate_ic, uniform_mesh
from exnerdg.sbp import lgl_basis
from exnerdg.timeint import TimeIntegrationConfig, integrate


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--degree", type=int, default=3)
    ap.add_argument("--elements", type=int, nargs="+", default=[16, 32, 64])
    ap.add_argument("--t-end", type=float, default=20000.0)
    ap.add_argument("--points", type=int, default=4000)
    args = ap.parse_args()

    sc = channel_scenario()
    a, b = sc.domain
    xs = a + (np.arange(args.points) + 0.5) * (b - a) / args.points
    fields = []
    for k in args.elements:
        semi = Semidiscretization(lgl_basis(args.degree), uniform_mesh(sc.domain, k), sc.params)
        u, _ = integrate(semi, interpolate_ic(semi, sc.initial),
                         TimeIntegrationConfig(t_end=args.t_end, cfl=0.5, callback_interval=10**6))
        fields.append(evaluate_field(semi, u, xs))
    for (k1, f1), (k2, f2) in zip(zip(args.elements, fields), zip(args.elements[1:], fields[1:])):
        d = np.sqrt(np.mean((f1 - f2) ** 2, axis=0) * (b - a))
        print(f"{k1:>4} vs {k2:<4}  h {d[0]:.4e}  hv {d[1]:.4e}  b {d[2]:.4e}")


if __name__ == "__main__":
    main()
