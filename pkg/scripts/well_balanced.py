"""Lake at rest over a step in the bed, P0-P2, roe_blend versus llf."""

import numpy as np

from exnerdg.app.scenarios import well_balanced_scenario
from exnerdg.dgsem import Semidiscretization, interpolate_ic, uniform_mesh
from exnerdg.sbp import lgl_basis
from exnerdg.timeint import TimeIntegrationConfig, integrate


def main(elements=16, dt=0.02, t_end=10.0):
    sc = well_balanced_scenario()
    print(f"{'scheme':<10} {'N':>2} {'max|dH|':>10} {'max|hv|':>10} {'max|db|':>10}")
    for dissipation in ("roe_blend", "llf"):
        for n in (0, 1, 2):
            semi = Semidiscretization(lgl_basis(n), uniform_mesh(sc.domain, elements), sc.params,
                                      dissipation=dissipation)
            u0 = interpolate_ic(semi, sc.initial)
            u, _ = integrate(semi, u0, TimeIntegrationConfig(t_end=t_end, dt=dt, callback_interval=10**6))
            d_eta = np.abs(u[..., 0] + u[..., 2] - u0[..., 0] - u0[..., 2]).max()
            print(f"{dissipation:<10} {n:>2} {d_eta:10.2e} {np.abs(u[..., 1]).max():10.2e} "
                  f"{np.abs(u[..., 2] - u0[..., 2]).max():10.2e}")


if __name__ == "__main__":
    main()
