"""Entropy conservative and entropy stable fluctuations for the SVE system.

Two entropy conservative (EC) constructions are provided:

* ``quadrature`` - path integrals of ``A(u) H(w)`` along the straight line
  in entropy variables, evaluated with a Gauss rule.  Model independent, but
  only EC up to the quadrature error.
* ``closed_form`` - ``D(+-) = 1/2 B(u_L/R) [[v]] +- (f(+-) - f*)`` in the
  auxiliary variables ``v = (h, h_b, b)``.

Entropy stable (ES) fluctuations add ``-+ Q [[u]]`` with a viscosity matrix
``Q``: local Lax-Friedrichs, or Roe blended with LLF just enough that the
interface never produces entropy.

Sign convention used throughout: the entropy *production* of a viscosity
matrix is ``-[[w]]^T Q [[u]]``; it is the contribution of the interface to
``dS/dt`` and must be <= 0.  LLF always has production <= 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

from .errors import BlendContractError, PathError
from .model import (
    EIG_COMPLEX,
    EIG_OK,
    P_G,
    P_HMIN,
    P_R,
    SveParams,
    State,
    _discharge,
    _entropy_flux,
    _entropy_vars,
    _hess_inv,
    _jacobian,
    _max_speed,
    _max_speed_pair,
    _jacobian_entries,
    _hess_inv_entries,
    _left_vector,
    _roe_average,
    _roe_core,
    _state_from_w,
    active_sediment_height,
    check_state,
    conservative_flux,
    entropy_flux,
    entropy_vars,
    max_wave_speed,
    roe_average,
    roe_eigen,
)
from .sbp import GaussRule

# kernel codes
VOL_CLOSED_FORM, VOL_QUADRATURE = 0, 1
DISS_NONE, DISS_LLF, DISS_ROE_BLEND, DISS_ROE = 0, 1, 2, 3
BLEND_CLAMP, BLEND_PAPER = 0, 1

# status codes
OK, PATH_FAILED = 0, 1


class FluctuationPair(NamedTuple):
    d_minus: np.ndarray
    d_plus: np.ndarray
    path: str = "auxiliary"  # "entropy" for the quadrature construction


@dataclass(frozen=True)
class BlendReport:
    delta_s: float
    delta_s_llf: float
    alpha: float


# ---------------------------------------------------------------------------
# kernels


@njit(cache=True)
def _ec_closed_form(hl, hvl, bl, hr, hvr, br, par):
    g = par[P_G]
    r = par[P_R]
    qbl, hbl, _, _ = _discharge(hl, hvl, par)
    qbr, hbr, _, _ = _discharge(hr, hvr, par)
    vl = hvl / hl
    vr = hvr / hr
    hv_avg = 0.5 * (hvl + hvr)
    fs0 = hv_avg
    fs1 = hv_avg * 0.5 * (vl + vr)
    fs2 = 0.5 * (qbl + qbr)
    dh = hr - hl
    db = br - bl
    ncl = 0.5 * (g * (hl + hbl) * dh + g * (hl + hbl / r) * db)
    ncr = 0.5 * (g * (hr + hbr) * dh + g * (hr + hbr / r) * db)
    return (
        fs0 - hvl,
        ncl + fs1 - hvl * vl,
        fs2 - qbl,
        hvr - fs0,
        ncr + hvr * vr - fs1,
        qbr - fs2,
    )


@njit(cache=True)
def _ec_quadrature(hl, hvl, bl, hr, hvr, br, par, nodes, weights):
    """Returns (status, D-_0, D-_1, D-_2, D+_0, D+_1, D+_2)."""
    wl0, wl1, wl2 = _entropy_vars(hl, hvl, bl, par)
    wr0, wr1, wr2 = _entropy_vars(hr, hvr, br, par)
    dw0 = wr0 - wl0
    dw1 = wr1 - wl1
    dw2 = wr2 - wl2
    m0 = m1 = m2 = p0 = p1 = p2 = 0.0
    hmin = par[P_HMIN]
    for q in range(nodes.shape[0]):
        s = nodes[q]
        w0 = wl0 + s * dw0
        w1 = wl1 + s * dw1
        w2 = wl2 + s * dw2
        h, hv, b = _state_from_w(w0, w1, w2, par)
        if not h > hmin:
            return PATH_FAILED, m0, m1, m2, p0, p1, p2
        e = _hess_inv_entries(w0, w1, w2, par)
        z0 = e[0] * dw0 + e[1] * dw1 + e[2] * dw2
        z1 = e[3] * dw0 + e[4] * dw1 + e[5] * dw2
        z2 = e[6] * dw0 + e[7] * dw1 + e[8] * dw2
        a10, a11, a12, a20, a21 = _jacobian_entries(h, hv, b, par)
        y0 = z1
        y1 = a10 * z0 + a11 * z1 + a12 * z2
        y2 = a20 * z0 + a21 * z1
        cm = weights[q] * (1.0 - s)
        cp = weights[q] * s
        m0 += cm * y0
        m1 += cm * y1
        m2 += cm * y2
        p0 += cp * y0
        p1 += cp * y1
        p2 += cp * y2
    return OK, m0, m1, m2, p0, p1, p2


@njit(cache=True)
def _ec_pair(hl, hvl, bl, hr, hvr, br, par, kind, nodes, weights):
    """Dispatch to the EC constructor; returns (status, D-, D+) as 7 scalars."""
    if kind == VOL_CLOSED_FORM:
        a0, a1, a2, b0, b1, b2 = _ec_closed_form(hl, hvl, bl, hr, hvr, br, par)
        return OK, a0, a1, a2, b0, b1, b2
    return _ec_quadrature(hl, hvl, bl, hr, hvr, br, par, nodes, weights)


@njit(cache=True)
def _blend_alpha(ds, ds_llf, mode):
    if ds <= 0.0:
        return 0.0
    denom = abs(ds_llf - ds)
    if mode == BLEND_PAPER:
        return 1.0 if denom == 0.0 else max(ds / denom, 1.0)
    if denom == 0.0:
        return 1.0
    return min(max(ds / denom, 0.0), 1.0)


@njit(cache=True)
def _dissipation(hl, hvl, bl, hr, hvr, br, par, kind, mode):
    """Return (Q[[u]]_0, Q[[u]]_1, Q[[u]]_2, production, production_llf, alpha)."""
    du0 = hr - hl
    du1 = hvr - hvl
    du2 = br - bl
    if kind == DISS_NONE:
        return 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    wl0, wl1, wl2 = _entropy_vars(hl, hvl, bl, par)
    wr0, wr1, wr2 = _entropy_vars(hr, hvr, br, par)
    dw0 = wr0 - wl0
    dw1 = wr1 - wl1
    dw2 = wr2 - wl2
    if kind == DISS_LLF:
        half_lam = 0.5 * _max_speed_pair(hl, hvl, bl, hr, hvr, br, par)
        prod_llf = -half_lam * (dw0 * du0 + dw1 * du1 + dw2 * du2)
        return half_lam * du0, half_lam * du1, half_lam * du2, prod_llf, prod_llf, 1.0
    ht, hvt, bt = _roe_average(hl, hvl, bl, hr, hvr, br)
    status, l0, l1, l2, v, c1, c2 = _roe_core(ht, hvt, bt, par)
    # same bound as _max_speed_pair, reusing the Roe-state roots when real
    lam_roe = max(abs(l0), abs(l2)) if status != EIG_COMPLEX else _max_speed(ht, hvt, bt, par)
    half_lam = 0.5 * max(_max_speed(hl, hvl, bl, par), _max_speed(hr, hvr, br, par), lam_roe)
    prod_llf = -half_lam * (dw0 * du0 + dw1 * du1 + dw2 * du2)
    if status != EIG_OK:
        # no usable eigensystem: fall back to LLF at this interface
        return half_lam * du0, half_lam * du1, half_lam * du2, prod_llf, prod_llf, 1.0
    # 1/2 R |Lambda| R^{-1} [[u]]
    q0 = q1 = q2 = 0.0
    for i in range(3):
        if i == 0:
            li, lj, lk = l0, l1, l2
        elif i == 1:
            li, lj, lk = l1, l2, l0
        else:
            li, lj, lk = l2, l0, l1
        e0, e1, e2 = _left_vector(li, lj, lk, v, c1, c2)
        z = 0.5 * abs(li) * (e0 * du0 + e1 * du1 + e2 * du2)
        q0 += z
        q1 += li * z
        q2 += ((v - li) ** 2 - c1) / c2 * z
    prod = -(dw0 * q0 + dw1 * q1 + dw2 * q2)
    if kind == DISS_ROE:
        return q0, q1, q2, prod, prod_llf, 0.0
    alpha = _blend_alpha(prod, prod_llf, mode)
    return (
        alpha * half_lam * du0 + (1.0 - alpha) * q0,
        alpha * half_lam * du1 + (1.0 - alpha) * q1,
        alpha * half_lam * du2 + (1.0 - alpha) * q2,
        prod,
        prod_llf,
        alpha,
    )


# ---------------------------------------------------------------------------
# public API


def _states(u_l, u_r, p):
    return check_state(u_l, p), check_state(u_r, p)


def ec_fluctuation_closed_form(u_l: State, u_r: State, p: SveParams) -> FluctuationPair:
    u_l, u_r = _states(u_l, u_r, p)
    d = _ec_closed_form(*u_l, *u_r, p.packed)
    return FluctuationPair(np.array(d[:3]), np.array(d[3:]), "auxiliary")


def ec_fluctuation_quadrature(
    u_l: State, u_r: State, p: SveParams, rule: GaussRule
) -> FluctuationPair:
    u_l, u_r = _states(u_l, u_r, p)
    status, *d = _ec_quadrature(*u_l, *u_r, p.packed, rule.nodes, rule.weights)
    if status != OK:
        raise PathError(f"entropy-variable path between {u_l} and {u_r} leaves h > h_min")
    return FluctuationPair(np.array(d[:3]), np.array(d[3:]), "entropy")


def ec_residual(u_l: State, u_r: State, pair: FluctuationPair, p: SveParams) -> float:
    """``w_L . D- + w_R . D+ - (q_R - q_L)``; zero for an EC pair."""
    w_l = np.array(entropy_vars(u_l, p))
    w_r = np.array(entropy_vars(u_r, p))
    return float(
        w_l @ pair.d_minus + w_r @ pair.d_plus - (entropy_flux(u_r, p) - entropy_flux(u_l, p))
    )


def entropy_production(u_l: State, u_r: State, pair: FluctuationPair, p: SveParams) -> float:
    """Contribution of one interface to dS/dt, i.e. ``-ec_residual``."""
    return -ec_residual(u_l, u_r, pair, p)


def path_integral(u_l: State, u_r: State, p: SveParams, rule: GaussRule, path: str) -> np.ndarray:
    """``int_0^1 A(Phi) dPhi/ds ds`` along the named path.

    ``entropy``: straight line in entropy variables, dPhi/ds = H [[w]].
    ``auxiliary``: straight line in (h, h_b, b); the conservative part
    integrates exactly to [[f]] and the nonconservative row is integrated
    with the rule.
    """
    u_l, u_r = _states(u_l, u_r, p)
    par = p.packed
    if path == "entropy":
        w_l = np.array(_entropy_vars(*u_l, par))
        w_r = np.array(_entropy_vars(*u_r, par))
        dw = w_r - w_l
        total = np.zeros(3)
        for s, wt in zip(rule.nodes, rule.weights):
            w = w_l + s * dw
            total += wt * (_jacobian(*_state_from_w(*w, par), par) @ (_hess_inv(*w, par) @ dw))
        return total
    if path != "auxiliary":
        raise ValueError(f"unknown path {path!r}")
    hb_l = active_sediment_height(u_l, p)
    hb_r = active_sediment_height(u_r, p)
    dh = u_r.h - u_l.h
    db = u_r.b - u_l.b
    row = 0.0
    for s, wt in zip(rule.nodes, rule.weights):
        h = u_l.h + s * dh
        hb = hb_l + s * (hb_r - hb_l)
        row += wt * (p.g * (h + hb) * dh + p.g * (h + hb / p.r) * db)
    out = conservative_flux(u_r, p) - conservative_flux(u_l, p)
    out[1] += row
    return out


def path_conservation_residual(
    u_l: State, u_r: State, pair: FluctuationPair, p: SveParams, rule: GaussRule
) -> np.ndarray:
    return pair.d_minus + pair.d_plus - path_integral(u_l, u_r, p, rule, pair.path)


def llf_viscosity(u_l: State, u_r: State, p: SveParams) -> np.ndarray:
    return 0.5 * max_wave_speed(u_l, u_r, p) * np.eye(3)


def roe_viscosity(u_l: State, u_r: State, p: SveParams) -> np.ndarray:
    """``1/2 R |Lambda| R^-1`` at the approximate Roe average."""
    eig = roe_eigen(roe_average(u_l, u_r, p), p)
    return 0.5 * eig.right_vectors @ np.diag(np.abs(eig.lambdas)) @ eig.left_vectors


def blend_alpha(delta_s: float, delta_s_llf: float, strict_paper: bool = False) -> float:
    """Smallest LLF weight that makes the blended production non-positive.

    ``delta_s`` and ``delta_s_llf`` are entropy productions (> 0 is bad).
    ``strict_paper=True`` reproduces the literal ``max(ratio, 1)`` rule,
    which always returns pure LLF once the matrix produces entropy.
    """
    return float(_blend_alpha(delta_s, delta_s_llf, BLEND_PAPER if strict_paper else BLEND_CLAMP))


def blend_viscosity(
    u_l: State,
    u_r: State,
    q: np.ndarray,
    q_llf: np.ndarray,
    p: SveParams,
    strict_paper: bool = False,
) -> tuple[np.ndarray, BlendReport]:
    u_l, u_r = _states(u_l, u_r, p)
    dw = np.array(entropy_vars(u_r, p)) - np.array(entropy_vars(u_l, p))
    du = np.subtract(u_r, u_l)
    delta_s = -float(dw @ q @ du)
    delta_s_llf = -float(dw @ q_llf @ du)
    scale = max(1.0, abs(delta_s), abs(delta_s_llf))
    if delta_s > 0.0 and delta_s_llf > 1e-12 * scale:
        raise BlendContractError(
            f"reference viscosity produces entropy ({delta_s_llf:.3e}); cannot blend"
        )
    alpha = blend_alpha(delta_s, delta_s_llf, strict_paper)
    q_es = alpha * np.asarray(q_llf) + (1.0 - alpha) * np.asarray(q)
    return q_es, BlendReport(delta_s, delta_s_llf, alpha)


def es_fluctuation(
    u_l: State, u_r: State, ec: FluctuationPair, q_es: np.ndarray
) -> FluctuationPair:
    """``D-_ES = D-_EC - Q [[u]]``, ``D+_ES = D+_EC + Q [[u]]``."""
    dq = np.asarray(q_es) @ np.subtract(u_r, u_l)
    return FluctuationPair(ec.d_minus - dq, ec.d_plus + dq, ec.path)


def interface_fluctuation(
    u_l: State,
    u_r: State,
    p: SveParams,
    dissipation: str = "roe_blend",
    rule: GaussRule | None = None,
    strict_paper: bool = False,
) -> tuple[FluctuationPair, BlendReport]:
    """Compiled interface kernel as used by the DG assembly."""
    u_l, u_r = _states(u_l, u_r, p)
    kind = {"none": DISS_NONE, "llf": DISS_LLF, "roe_blend": DISS_ROE_BLEND, "roe": DISS_ROE}[
        dissipation
    ]
    if rule is None:
        ec = ec_fluctuation_closed_form(u_l, u_r, p)
    else:
        ec = ec_fluctuation_quadrature(u_l, u_r, p, rule)
    *qdu, prod, prod_llf, alpha = _dissipation(
        *u_l, *u_r, p.packed, kind, BLEND_PAPER if strict_paper else BLEND_CLAMP
    )
    qdu = np.array(qdu)
    pair = FluctuationPair(ec.d_minus - qdu, ec.d_plus + qdu, ec.path)
    return pair, BlendReport(prod, prod_llf, alpha)
