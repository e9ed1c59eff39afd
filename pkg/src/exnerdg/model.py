"""Saint-Venant-Exner physics in conserved variables u = (h, hv, b).

Every formula has a compiled scalar kernel (leading underscore, operating
on plain floats and a packed parameter vector) that the DG assembly calls
in its inner loops, plus a thin public wrapper taking :class:`State` and
:class:`SveParams`.

The system, including the entropy correction term of Fernandez-Nieto et al.,
reads::

    h_t  + (hv)_x                                        = 0
    hv_t + (hv^2)_x + g h (h+b)_x + g h_b/r (r h + b)_x  = -tau/rho_f
    b_t  + (q_b)_x                                       = 0

with active sediment height ``h_b = q_b / v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Union

import numpy as np
from numba import njit

from .errors import (
    DegeneracyError,
    HyperbolicityError,
    InversionError,
    ParameterError,
    PositivityError,
)

# packed parameter layout
P_G, P_R, P_VARTHETA, P_MANNING, P_MODEL, P_AG, P_DS, P_THETA_C, P_RHO_F, P_HMIN = range(10)
MODEL_GRASS, MODEL_MPM = 0.0, 1.0

V_EPS = 1e-12
EIG_GAP_TOL = 1e-10

# roe_eigen status codes
EIG_OK, EIG_COMPLEX, EIG_DEGENERATE = 0, 1, 2


# ---------------------------------------------------------------------------
# parameters and small value types


@dataclass(frozen=True)
class Grass:
    """Power-law bedload ``q_b = vartheta * A_g * v^3``."""

    A_g: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.A_g <= 1.0:
            raise ParameterError(f"Grass coefficient A_g must lie in [0, 1], got {self.A_g}")


@dataclass(frozen=True)
class MPM:
    """Meyer-Peter & Mueller threshold law driven by the Manning shear stress."""

    d_s: float = 1e-3
    theta_c: float = 0.047

    def __post_init__(self):
        if self.d_s <= 0.0 or self.theta_c <= 0.0:
            raise ParameterError("MPM needs d_s > 0 and theta_c > 0")


Discharge = Union[Grass, MPM]


@dataclass(frozen=True)
class SveParams:
    g: float = 9.81
    r: float = 0.3
    porosity: float = 0.4
    manning_n: float = 0.0
    discharge: Discharge = field(default_factory=Grass)
    rho_f: float = 1.0
    h_min: float = 1e-10

    def __post_init__(self):
        if self.g <= 0.0:
            raise ParameterError(f"gravity must be positive, got {self.g}")
        if self.r <= 0.0 or self.r == 1.0:
            raise ParameterError(f"density ratio r must be positive and != 1, got {self.r}")
        if not 0.0 <= self.porosity < 1.0:
            raise ParameterError(f"porosity must lie in [0, 1), got {self.porosity}")
        if self.manning_n < 0.0:
            raise ParameterError(f"Manning coefficient must be >= 0, got {self.manning_n}")
        if self.rho_f <= 0.0:
            raise ParameterError(f"rho_f must be positive, got {self.rho_f}")
        if self.h_min <= 0.0:
            raise ParameterError(f"h_min must be positive, got {self.h_min}")
        if isinstance(self.discharge, MPM) and self.r >= 1.0:
            raise ParameterError("MPM discharge requires r < 1 (sqrt(1/r - 1) undefined)")

    @property
    def vartheta(self) -> float:
        return 1.0 / (1.0 - self.porosity)

    @property
    def rho_s(self) -> float:
        return self.rho_f / self.r

    @cached_property
    def packed(self) -> np.ndarray:
        par = np.zeros(10)
        par[P_G] = self.g
        par[P_R] = self.r
        par[P_VARTHETA] = self.vartheta
        par[P_MANNING] = self.manning_n
        par[P_RHO_F] = self.rho_f
        par[P_HMIN] = self.h_min
        if isinstance(self.discharge, Grass):
            par[P_MODEL] = MODEL_GRASS
            par[P_AG] = self.discharge.A_g
        else:
            par[P_MODEL] = MODEL_MPM
            par[P_DS] = self.discharge.d_s
            par[P_THETA_C] = self.discharge.theta_c
        par.setflags(write=False)
        return par


class State(NamedTuple):
    h: float
    hv: float
    b: float

    @property
    def v(self) -> float:
        return self.hv / self.h

    @classmethod
    def from_velocity(cls, h, v, b) -> "State":
        return cls(h, h * v, b)


class EntropyVars(NamedTuple):
    w1: float
    w2: float
    w3: float


@dataclass(frozen=True, eq=False)
class RoeEigen:
    lambdas: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray


# ---------------------------------------------------------------------------
# compiled kernels


@njit(cache=True)
def _discharge(h, hv, par):
    """Return (q_b, h_b, dq_b/dh, dq_b/dhv)."""
    v = hv / h
    vt = par[P_VARTHETA]
    if par[P_MODEL] == MODEL_GRASS:
        ag = par[P_AG]
        qb = vt * ag * v * v * v
        hb = vt * ag * v * v
        return qb, hb, -3.0 * vt * ag * v * v * v / h, 3.0 * vt * ag * v * v / h
    # MPM: theta = kappa * hv|hv| h^{-7/3}
    g = par[P_G]
    r = par[P_R]
    rho_f = par[P_RHO_F]
    ds = par[P_DS]
    rho_s = rho_f / r
    kappa = rho_f * par[P_MANNING] ** 2 / ((rho_s - rho_f) * ds)
    theta = kappa * hv * abs(hv) * h ** (-7.0 / 3.0)
    excess = abs(theta) - par[P_THETA_C]
    if excess <= 0.0:
        return 0.0, 0.0, 0.0, 0.0
    scale = vt * 8.0 * math.sqrt(g * (1.0 / r - 1.0) * ds**3)
    sgn = 1.0 if theta > 0.0 else -1.0
    qb = scale * sgn * excess**1.5
    dq_dtheta = scale * 1.5 * math.sqrt(excess)
    dtheta_dh = -7.0 / 3.0 * kappa * hv * abs(hv) * h ** (-10.0 / 3.0)
    dtheta_dhv = 2.0 * kappa * abs(hv) * h ** (-7.0 / 3.0)
    hb = qb / v if abs(v) >= V_EPS else 0.0
    return qb, hb, dq_dtheta * dtheta_dh, dq_dtheta * dtheta_dhv


@njit(cache=True)
def _shear_stress(h, hv, par):
    v = hv / h
    return par[P_RHO_F] * par[P_G] * par[P_MANNING] ** 2 * v * abs(v) / h ** (1.0 / 3.0)


@njit(cache=True)
def _flux(h, hv, b, par):
    qb, _, _, _ = _discharge(h, hv, par)
    return hv, hv * hv / h, qb


@njit(cache=True)
def _noncons_row(h, hv, par):
    """Nonzero row of B(u): (g(h + h_b), 0, g(h + h_b/r))."""
    _, hb, _, _ = _discharge(h, hv, par)
    g = par[P_G]
    return g * (h + hb), g * (h + hb / par[P_R])


@njit(cache=True)
def _jacobian_entries(h, hv, b, par):
    """Nonconstant entries (a10, a11, a12, a20, a21) of A(u); a01 = 1."""
    qb, hb, dqdh, dqdhv = _discharge(h, hv, par)
    g = par[P_G]
    v = hv / h
    return g * (h + hb) - v * v, 2.0 * v, g * (h + hb / par[P_R]), dqdh, dqdhv


@njit(cache=True)
def _jacobian(h, hv, b, par):
    a10, a11, a12, a20, a21 = _jacobian_entries(h, hv, b, par)
    a = np.zeros((3, 3))
    a[0, 1] = 1.0
    a[1, 0] = a10
    a[1, 1] = a11
    a[1, 2] = a12
    a[2, 0] = a20
    a[2, 1] = a21
    return a


@njit(cache=True)
def _entropy(h, hv, b, par):
    g = par[P_G]
    r = par[P_R]
    return 0.5 * r * hv * hv / h + 0.5 * g * (r * h * h + b * b) + r * g * h * b


@njit(cache=True)
def _entropy_flux(h, hv, b, par):
    g = par[P_G]
    r = par[P_R]
    v = hv / h
    qb, _, _, _ = _discharge(h, hv, par)
    return r * hv * (0.5 * v * v + g * (h + b)) + g * qb * (r * h + b)


@njit(cache=True)
def _entropy_vars(h, hv, b, par):
    g = par[P_G]
    r = par[P_R]
    v = hv / h
    return r * (g * (h + b) - 0.5 * v * v), r * v, g * (r * h + b)


@njit(cache=True)
def _state_from_w(w1, w2, w3, par):
    g = par[P_G]
    r = par[P_R]
    v = w2 / r
    s1 = (w1 / r + 0.5 * v * v) / g  # h + b
    s2 = w3 / g  # r h + b
    h = (s2 - s1) / (r - 1.0)
    return h, h * v, s1 - h


@njit(cache=True)
def _hess_inv_entries(w1, w2, w3, par):
    """Row-major entries of H = du/dw, the analytic Jacobian of _state_from_w."""
    g = par[P_G]
    r = par[P_R]
    h, _, _ = _state_from_w(w1, w2, w3, par)
    v = w2 / r
    c = 1.0 / (g * r * (r - 1.0))
    dh0 = -c
    dh1 = -c * v
    dh2 = 1.0 / (g * (r - 1.0))
    return (
        dh0, dh1, dh2,
        v * dh0, v * dh1 + h / r, v * dh2,
        1.0 / (g * r) - dh0, v / (g * r) - dh1, -dh2,
    )


@njit(cache=True)
def _hess_inv(w1, w2, w3, par):
    e = _hess_inv_entries(w1, w2, w3, par)
    hm = np.empty((3, 3))
    for n in range(9):
        hm[n // 3, n % 3] = e[n]
    return hm


@njit(cache=True)
def _char_poly(h, hv, b, par):
    """Coefficients (B, C, D) of det(lam I - A) = lam^3 + B lam^2 + C lam + D."""
    _, hb, dqdh, dqdhv = _discharge(h, hv, par)
    g = par[P_G]
    v = hv / h
    c1 = g * (h + hb)
    c2 = g * (h + hb / par[P_R])
    return -2.0 * v, -(c1 - v * v + c2 * dqdhv), -c2 * dqdh


@njit(cache=True)
def _polish(lam, bb, cc, dd):
    for _ in range(2):
        f = ((lam + bb) * lam + cc) * lam + dd
        df = (3.0 * lam + 2.0 * bb) * lam + cc
        if df == 0.0:
            break
        step = f / df
        lam -= step
    return lam


@njit(cache=True)
def _cubic_real_roots(bb, cc, dd):
    """Sorted real roots of lam^3 + bb lam^2 + cc lam + dd via the trigonometric
    form of Cardano's formula. Returns (status, l1, l2, l3)."""
    shift = -bb / 3.0
    p = cc - bb * bb / 3.0
    q = 2.0 * bb**3 / 27.0 - bb * cc / 3.0 + dd
    disc = 4.0 * p**3 + 27.0 * q * q
    size = 4.0 * abs(p) ** 3 + 27.0 * q * q
    if disc > 1e-12 * size:
        return EIG_COMPLEX, shift, shift, shift
    if p >= 0.0:
        return EIG_DEGENERATE, shift, shift, shift
    m = 2.0 * math.sqrt(-p / 3.0)
    arg = 3.0 * q / (p * m)
    if arg > 1.0:
        arg = 1.0
    elif arg < -1.0:
        arg = -1.0
    phi = math.acos(arg) / 3.0
    t0 = m * math.cos(phi)
    t1 = m * math.cos(phi - 2.0 * math.pi / 3.0)
    t2 = m * math.cos(phi - 4.0 * math.pi / 3.0)
    l0 = _polish(t0 + shift, bb, cc, dd)
    l1 = _polish(t1 + shift, bb, cc, dd)
    l2 = _polish(t2 + shift, bb, cc, dd)
    # sort three values
    if l0 > l1:
        l0, l1 = l1, l0
    if l1 > l2:
        l1, l2 = l2, l1
    if l0 > l1:
        l0, l1 = l1, l0
    return EIG_OK, l0, l1, l2


@njit(cache=True)
def _cbrt(x):
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


@njit(cache=True)
def _cubic_max_modulus(bb, cc, dd):
    status, l0, l1, l2 = _cubic_real_roots(bb, cc, dd)
    if status != EIG_COMPLEX:
        return max(abs(l0), abs(l1), abs(l2))
    shift = -bb / 3.0
    p = cc - bb * bb / 3.0
    q = 2.0 * bb**3 / 27.0 - bb * cc / 3.0 + dd
    delta = max(q * q / 4.0 + p**3 / 27.0, 0.0)
    sd = math.sqrt(delta)
    t1 = _cbrt(-0.5 * q + sd) + _cbrt(-0.5 * q - sd)
    im2 = max(0.75 * t1 * t1 + p, 0.0)
    re = -0.5 * t1 + shift
    return max(abs(t1 + shift), math.sqrt(re * re + im2))


@njit(cache=True)
def _max_speed(h, hv, b, par):
    bb, cc, dd = _char_poly(h, hv, b, par)
    return _cubic_max_modulus(bb, cc, dd)


@njit(cache=True)
def _roe_average(hl, hvl, bl, hr, hvr, br):
    sl = math.sqrt(hl)
    sr = math.sqrt(hr)
    v = (sl * hvl / hl + sr * hvr / hr) / (sl + sr)
    h = 0.5 * (hl + hr)
    return h, h * v, 0.5 * (bl + br)


@njit(cache=True)
def _max_speed_pair(hl, hvl, bl, hr, hvr, br, par):
    ht, hvt, bt = _roe_average(hl, hvl, bl, hr, hvr, br)
    return max(
        _max_speed(hl, hvl, bl, par),
        _max_speed(hr, hvr, br, par),
        _max_speed(ht, hvt, bt, par),
    )


@njit(cache=True)
def _roe_core(h, hv, b, par):
    """Eigenvalues of A(u) plus the coefficients fixing R and R^{-1}.

    Returns (status, l0, l1, l2, v, c1, c2) with c1 = g(h + h_b) and
    c2 = g(h + h_b/r).  Right eigenvector i is (1, l_i, ((v - l_i)^2 - c1)/c2).
    """
    bb, cc, dd = _char_poly(h, hv, b, par)
    status, l0, l1, l2 = _cubic_real_roots(bb, cc, dd)
    _, hb, _, _ = _discharge(h, hv, par)
    g = par[P_G]
    v = hv / h
    c1 = g * (h + hb)
    c2 = g * (h + hb / par[P_R])
    if status == EIG_OK:
        scale = max(abs(l0), abs(l2), 1e-300)
        if min(l1 - l0, l2 - l1) < EIG_GAP_TOL * scale:
            status = EIG_DEGENERATE
    return status, l0, l1, l2, v, c1, c2


@njit(cache=True)
def _left_vector(li, lj, lk, v, c1, c2):
    den = (li - lj) * (li - lk)
    return (c1 - v * v + lj * lk) / den, (2.0 * v - lj - lk) / den, c2 / den


@njit(cache=True)
def _roe_eigen(h, hv, b, par):
    """Eigen-decomposition of A(u) at a (Roe-averaged) state.

    Returns (status, lambdas, R, R^{-1}); the matrices are only meaningful
    for status == EIG_OK.
    """
    lam = np.zeros(3)
    rm = np.zeros((3, 3))
    lm = np.zeros((3, 3))
    status, l0, l1, l2, v, c1, c2 = _roe_core(h, hv, b, par)
    lam[0] = l0
    lam[1] = l1
    lam[2] = l2
    if status != EIG_OK:
        return status, lam, rm, lm
    for i in range(3):
        li = lam[i]
        rm[0, i] = 1.0
        rm[1, i] = li
        rm[2, i] = ((v - li) ** 2 - c1) / c2
        lm[i, 0], lm[i, 1], lm[i, 2] = _left_vector(li, lam[(i + 1) % 3], lam[(i + 2) % 3], v, c1, c2)
    return EIG_OK, lam, rm, lm


@njit(cache=True)
def _max_speed_field(u, par, out):
    for k in range(u.shape[0]):
        for i in range(u.shape[1]):
            out[k, i] = _max_speed(u[k, i, 0], u[k, i, 1], u[k, i, 2], par)
    return out


# ---------------------------------------------------------------------------
# public API


def check_state(u: State, p: SveParams) -> State:
    u = State(*u)
    if not u.h >= p.h_min:
        raise PositivityError(f"water height {u.h!r} below floor {p.h_min}", state=u)
    return u


def sediment_discharge(u: State, p: SveParams) -> float:
    u = check_state(u, p)
    return _discharge(u.h, u.hv, p.packed)[0]


def active_sediment_height(u: State, p: SveParams) -> float:
    """h_b = q_b/v; the Grass branch uses the division-free form vartheta A_g v^2."""
    u = check_state(u, p)
    return _discharge(u.h, u.hv, p.packed)[1]


def discharge_derivatives(u: State, p: SveParams) -> tuple[float, float]:
    u = check_state(u, p)
    _, _, dqdh, dqdhv = _discharge(u.h, u.hv, p.packed)
    return dqdh, dqdhv


def shear_stress(u: State, p: SveParams) -> float:
    u = check_state(u, p)
    return _shear_stress(u.h, u.hv, p.packed)


def friction_source(u: State, p: SveParams) -> np.ndarray:
    tau = shear_stress(u, p)
    return np.array([0.0, -tau / p.rho_f, 0.0])


def conservative_flux(u: State, p: SveParams) -> np.ndarray:
    u = check_state(u, p)
    return np.array(_flux(u.h, u.hv, u.b, p.packed))


def noncons_matrix(u: State, p: SveParams) -> np.ndarray:
    u = check_state(u, p)
    b10, b12 = _noncons_row(u.h, u.hv, p.packed)
    m = np.zeros((3, 3))
    m[1, 0] = b10
    m[1, 2] = b12
    return m


def generalized_jacobian(u: State, p: SveParams) -> np.ndarray:
    u = check_state(u, p)
    return _jacobian(u.h, u.hv, u.b, p.packed)


def entropy(u: State, p: SveParams) -> float:
    u = check_state(u, p)
    return _entropy(u.h, u.hv, u.b, p.packed)


def entropy_flux(u: State, p: SveParams) -> float:
    u = check_state(u, p)
    return _entropy_flux(u.h, u.hv, u.b, p.packed)


def entropy_vars(u: State, p: SveParams) -> EntropyVars:
    u = check_state(u, p)
    return EntropyVars(*_entropy_vars(u.h, u.hv, u.b, p.packed))


def state_from_entropy_vars(w: EntropyVars, p: SveParams) -> State:
    u = State(*_state_from_w(*w, p.packed))
    if not u.h > p.h_min:
        raise InversionError(f"entropy variables {tuple(w)} give water height {u.h!r}")
    return u


def entropy_hessian_inverse(w: EntropyVars, p: SveParams) -> np.ndarray:
    state_from_entropy_vars(w, p)
    return _hess_inv(*w, p.packed)


def roe_average(u_l: State, u_r: State, p: SveParams) -> State:
    u_l = check_state(u_l, p)
    u_r = check_state(u_r, p)
    return State(*_roe_average(*u_l, *u_r))


def roe_eigen(u_tilde: State, p: SveParams) -> RoeEigen:
    u = check_state(u_tilde, p)
    status, lam, rm, lm = _roe_eigen(u.h, u.hv, u.b, p.packed)
    if status == EIG_COMPLEX:
        raise HyperbolicityError(f"complex eigenvalues at state {u}")
    if status == EIG_DEGENERATE:
        raise DegeneracyError(f"near-coincident eigenvalues {lam} at state {u}")
    return RoeEigen(lam, rm, lm)


def max_wave_speed(u_l: State, u_r: State, p: SveParams) -> float:
    u_l = check_state(u_l, p)
    u_r = check_state(u_r, p)
    return _max_speed_pair(*u_l, *u_r, p.packed)


def symmetrization_defect(u: State, p: SveParams) -> float:
    """Max-norm asymmetry of A(u) H(w(u)); zero iff H right-symmetrizes A."""
    ah = generalized_jacobian(u, p) @ entropy_hessian_inverse(entropy_vars(u, p), p)
    return float(np.max(np.abs(ah - ah.T)))


# vectorised helpers over nodal arrays (..., 3)


def entropy_density(u: np.ndarray, p: SveParams) -> np.ndarray:
    h, hv, b = u[..., 0], u[..., 1], u[..., 2]
    return 0.5 * p.r * hv * hv / h + 0.5 * p.g * (p.r * h * h + b * b) + p.r * p.g * h * b


def entropy_vars_array(u: np.ndarray, p: SveParams) -> np.ndarray:
    h, hv, b = u[..., 0], u[..., 1], u[..., 2]
    v = hv / h
    return np.stack(
        [p.r * (p.g * (h + b) - 0.5 * v * v), p.r * v, p.g * (p.r * h + b)], axis=-1
    )


def friction_source_array(u: np.ndarray, p: SveParams) -> np.ndarray:
    h, hv = u[..., 0], u[..., 1]
    v = hv / h
    out = np.zeros_like(u)
    out[..., 1] = -p.g * p.manning_n**2 * v * np.abs(v) / np.cbrt(h)
    return out


def max_wave_speed_array(u: np.ndarray, p: SveParams) -> np.ndarray:
    """Largest |eigenvalue| of A at every node of a (K, N+1, 3) field."""
    return _max_speed_field(np.ascontiguousarray(u), p.packed, np.empty(u.shape[:2]))
