"""Entropy rate per EC fluctuation on the channel problem.

Two modes:

``separate`` (default) integrates once per fluctuation, EC volume and
surface, and reports max |dS/dt| over the logged steps together with the
median rhs cost.  This is what ``exnerdg entropy-study`` does.

``shared`` integrates once with the closed form, stores states every
``--every`` time units and evaluates the instantaneous rate of every
fluctuation on each stored state.  This is much cheaper for long horizons;
the quadrature error is largest after the shock has formed (t > 24000),
so the full horizon is needed to see the largest rates.

    python3 scripts/entropy_study.py --mode shared --t-end 30000
"""

import argparse

import numpy as np

from exnerdg.app.config import RunConfig
from exnerdg.app.scenarios import channel_scenario
from exnerdg.app.studies import entropy_study_table, run_entropy_study
from exnerdg.dgsem import Semidiscretization, entropy_rate, interpolate_ic, rhs, uniform_mesh
from exnerdg.sbp import lgl_basis
from exnerdg.timeint import TimeIntegrationConfig, integrate

FLUCTUATIONS = {"quadrature:1": ("quadrature", 1), "quadrature:2": ("quadrature", 2),
                "quadrature:3": ("quadrature", 3), "closed_form": ("closed_form", 3)}


def shared(args):
    sc = channel_scenario()
    mesh = uniform_mesh(sc.domain, args.elements)
    semis = {k: Semidiscretization(lgl_basis(args.degree), mesh, sc.params, volume=v, quad_points=n, surface="ec")
             for k, (v, n) in FLUCTUATIONS.items()}
    worst = dict.fromkeys(semis, 0.0)

    def probe(t, u, n):
        rates = {k: abs(entropy_rate(s, u, rhs(s, u))) / mesh.length for k, s in semis.items()}
        for k, r in rates.items():
            worst[k] = max(worst[k], r)
        print(f"t={t:9.1f}  " + "  ".join(f"{k}={r:.2e}" for k, r in rates.items()), flush=True)

    base = semis["closed_form"]
    integrate(base, interpolate_ic(base, sc.initial),
              TimeIntegrationConfig(t_end=args.t_end, cfl=0.5, callback_time=args.every), callbacks=[probe])
    print("max over stored states (per unit length):")
    for k, r in worst.items():
        print(f"  {k:<14} {r:.3e}")


def separate(args):
    cfg = RunConfig.from_mapping({
        "mesh": {"degree": str(args.degree), "elements": str(args.elements)},
        "model": {"scenario": "channel"},
        "time": {"cfl": "0.5", "t_end": str(args.t_end), "callback_interval": "10"},
    })
    print(entropy_study_table(run_entropy_study(cfg)))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--mode", choices=["separate", "shared"], default="separate")
    ap.add_argument("--degree", type=int, default=4)
    ap.add_argument("--elements", type=int, default=128)
    ap.add_argument("--t-end", type=float, default=5000.0)
    ap.add_argument("--every", type=float, default=250.0, help="shared mode: probe interval in time units")
    args = ap.parse_args()
    np.seterr(all="raise")
    (shared if args.mode == "shared" else separate)(args)


if __name__ == "__main__":
    main()
