"""Test problems: manufactured solution, dune in a channel, lake at rest."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import ParameterError
from ..model import Grass, State, SveParams, conservative_flux, friction_source_array, noncons_matrix

InitialFn = Callable[[np.ndarray], np.ndarray]
ExactFn = Callable[[np.ndarray, float], np.ndarray]
SourceFn = Callable[[np.ndarray, float, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Scenario:
    """A periodic test case.  Arrays of positions map to (..., 3) conserved states."""

    name: str
    initial: InitialFn
    domain: tuple[float, float]
    params: SveParams = field(default_factory=SveParams)
    exact: Optional[ExactFn] = None
    source: Optional[SourceFn] = None


def _stack(h, hv, b):
    h, hv, b = np.broadcast_arrays(h, hv, b)
    return np.stack([h, hv, b], axis=-1).astype(float)


# ---------------------------------------------------------------------------
# manufactured solution
#   h + b = 4 + cos(kx) cos(wt),  b = 1 + sin(kx),  v = 1/2
# on [0, sqrt 2], with k = 2 sqrt(2) pi and w = 2 pi.

MMS_K = 2.0 * math.sqrt(2.0) * math.pi
MMS_W = 2.0 * math.pi
MMS_V = 0.5


def _mms_exact(x, t):
    x = np.asarray(x, dtype=float)
    b = 1.0 + np.sin(MMS_K * x)
    h = 4.0 + np.cos(MMS_K * x) * math.cos(MMS_W * t) - b
    return _stack(h, MMS_V * h, b)


def _mms_source(p: SveParams):
    if not isinstance(p.discharge, Grass) or p.manning_n != 0.0:
        raise ParameterError("the manufactured solution needs Grass discharge and no friction")
    k, w, v, g, r = MMS_K, MMS_W, MMS_V, p.g, p.r
    # v is constant, so q_b and h_b are constant in space and time
    hb = p.vartheta * p.discharge.A_g * v * v

    def source(x, t, u=None):
        x = np.asarray(x, dtype=float)
        ckx, skx = np.cos(k * x), np.sin(k * x)
        cwt, swt = math.cos(w * t), math.sin(w * t)
        h = 3.0 + ckx * cwt - skx
        h_t = -w * ckx * swt
        h_x = -k * skx * cwt - k * ckx
        b_x = k * ckx
        s_h = h_t + v * h_x
        s_hv = (
            v * h_t
            + v * v * h_x
            + g * h * (h_x + b_x)
            + g * hb * (h_x + b_x / r)
        )
        return _stack(s_h, s_hv, 0.0)

    return source


def manufactured_scenario(p: SveParams | None = None) -> Scenario:
    p = SveParams() if p is None else p
    return Scenario(
        name="manufactured",
        initial=lambda x: _mms_exact(x, 0.0),
        domain=(0.0, math.sqrt(2.0)),
        params=p,
        exact=_mms_exact,
        source=_mms_source(p),
    )


# ---------------------------------------------------------------------------
# dune travelling through a periodic channel


def _dune(x):
    x = np.asarray(x, dtype=float)
    inside = (x >= 300.0) & (x <= 500.0)
    return np.where(inside, np.sin(np.pi * (x - 300.0) / 200.0) ** 2, 0.0)


def channel_scenario(p: SveParams | None = None) -> Scenario:
    p = SveParams() if p is None else p

    def initial(x):
        b = _dune(x)
        return _stack(10.0 - b, 10.0, b)

    source = None
    if p.manning_n > 0.0:
        source = lambda x, t, u: friction_source_array(u, p)  # noqa: E731
    return Scenario("channel", initial, (0.0, 1000.0), p, source=source)


# ---------------------------------------------------------------------------
# lake at rest over a step in the sediment layer


def well_balanced_scenario(p: SveParams | None = None) -> Scenario:
    p = SveParams() if p is None else p

    def initial(x):
        x = np.asarray(x, dtype=float)
        b = np.where(np.abs(x) < 0.5, 0.4, 0.0)
        return _stack(0.5 - b, 0.0, b)

    return Scenario(
        "well_balanced", initial, (-2.0, 2.0), p, exact=lambda x, t: initial(x)
    )


SCENARIOS = {
    "manufactured": manufactured_scenario,
    "channel": channel_scenario,
    "well_balanced": well_balanced_scenario,
}


def pde_residual(scenario: Scenario, x: np.ndarray, t: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """``u_t + f(u)_x + B(u) u_x - s`` of the exact solution by central differences.

    Independent of the analytic source derivation: it only uses the model's
    flux and nonconservative matrix evaluated on the exact field.
    """
    if scenario.exact is None:
        raise ValueError(f"scenario {scenario.name!r} has no exact solution")
    p = scenario.params
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = np.broadcast_to(np.asarray(t, dtype=float), x.shape)
    out = np.empty(x.shape + (3,))
    for n, (xi, ti) in enumerate(zip(x, t)):
        u = scenario.exact(np.array(xi), ti)
        u_t = (scenario.exact(np.array(xi), ti + eps) - scenario.exact(np.array(xi), ti - eps)) / (2 * eps)
        ul, ur = scenario.exact(np.array(xi - eps), ti), scenario.exact(np.array(xi + eps), ti)
        u_x = (ur - ul) / (2 * eps)
        f_x = (conservative_flux(State(*ur), p) - conservative_flux(State(*ul), p)) / (2 * eps)
        bmat = noncons_matrix(State(*u), p)
        src = scenario.source(np.array([xi]), ti, u[None, :])[0] if scenario.source else 0.0
        out[n] = u_t + f_x + bmat @ u_x - src
    return out
