"""Flux-differencing DGSEM on a periodic 1D mesh.

Per node (k, i) the semidiscrete update is::

    du/dt = -2/(w_i dx_k) * ( w_i sum_m 2 D_im D-(U_i, U_m)
                              + [i == 0] D+(U_N^{k-1}, U_0^k)
                              + [i == N] D-(U_N^k, U_0^{k+1}) ) + s(x, t)

The volume uses an EC fluctuation, the interfaces either the same EC
fluctuation or an ES one.  Each interface is evaluated once; its D- goes to
the left element and its D+ to the right one.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numba
import numpy as np
from numba import njit, prange

from .errors import ConfigurationError, NonFiniteError, PathError, PositivityError
from .fluctuations import (
    BLEND_CLAMP,
    BLEND_PAPER,
    DISS_LLF,
    DISS_NONE,
    DISS_ROE,
    DISS_ROE_BLEND,
    VOL_CLOSED_FORM,
    VOL_QUADRATURE,
    _dissipation,
    _ec_pair,
)
from .model import SveParams, State, entropy_density, entropy_vars_array, max_wave_speed_array
from .sbp import LobattoBasis, gauss_rule

THREADS_ENV = "EXNERDG_NUM_THREADS"

SourceFn = Callable[[np.ndarray, float, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Mesh1D:
    boundaries: np.ndarray
    periodic: bool = True

    @property
    def n_elements(self) -> int:
        return len(self.boundaries) - 1

    @property
    def dx(self) -> np.ndarray:
        return np.diff(self.boundaries)

    @property
    def length(self) -> float:
        return float(self.boundaries[-1] - self.boundaries[0])

    def node_coordinates(self, basis: LobattoBasis) -> np.ndarray:
        """(K, N+1) physical positions ``x_{k-1} + (xi + 1)/2 dx_k``."""
        return self.boundaries[:-1, None] + 0.5 * (basis.nodes[None, :] + 1.0) * self.dx[:, None]


def uniform_mesh(domain: tuple[float, float], n_elements: int) -> Mesh1D:
    a, b = map(float, domain)
    if not a < b:
        raise ConfigurationError(f"invalid domain [{a}, {b}]")
    if int(n_elements) != n_elements or n_elements < 1:
        raise ConfigurationError(f"number of elements must be a positive integer, got {n_elements}")
    bounds = np.linspace(a, b, int(n_elements) + 1)
    bounds.setflags(write=False)
    return Mesh1D(bounds)


_VOLUME = {"closed_form": VOL_CLOSED_FORM, "quadrature": VOL_QUADRATURE}
_DISSIPATION = {"llf": DISS_LLF, "roe_blend": DISS_ROE_BLEND, "roe": DISS_ROE}


@dataclass(eq=False)
class Semidiscretization:
    """Everything ``rhs`` needs besides the field.

    ``volume`` names the EC constructor used in the volume *and* inside the
    interface fluctuation; ``surface`` is ``"ec"`` or ``"es"``, the latter
    adding the ``dissipation`` viscosity.
    """

    basis: LobattoBasis
    mesh: Mesh1D
    params: SveParams = field(default_factory=SveParams)
    volume: str = "closed_form"
    quad_points: int = 3
    surface: str = "es"
    dissipation: str = "roe_blend"
    source: Optional[SourceFn] = None
    strict_paper_blend: bool = False
    # (production, llf production, alpha) per interface from the last rhs call;
    # interface j sits between elements j-1 and j (periodic)
    interface_log: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.volume not in _VOLUME:
            raise ConfigurationError(f"volume fluctuation must be one of {sorted(_VOLUME)}")
        if self.surface not in ("ec", "es"):
            raise ConfigurationError("surface fluctuation must be 'ec' or 'es'")
        if self.surface == "es" and self.dissipation not in _DISSIPATION:
            raise ConfigurationError(f"dissipation must be one of {sorted(_DISSIPATION)}")
        self.rule = gauss_rule(self.quad_points)
        self.x = self.mesh.node_coordinates(self.basis)
        self.interface_log = np.zeros((self.mesh.n_elements, 3))

    @property
    def field_shape(self) -> tuple[int, int, int]:
        return (self.mesh.n_elements, self.basis.n_nodes, 3)

    @property
    def _diss_code(self) -> int:
        return DISS_NONE if self.surface == "ec" else _DISSIPATION[self.dissipation]


def _rhs_impl(u, dmat, wts, dx, par, ec_kind, qn, qw, diss_kind, blend_mode, out, log, status):
    n_el = u.shape[0]
    n_nodes = u.shape[1]
    last = n_nodes - 1
    for k in prange(n_el):
        for i in range(n_nodes):
            for c in range(3):
                out[k, i, c] = 0.0
        for i in range(n_nodes):
            for m in range(i + 1, n_nodes):
                st, a0, a1, a2, b0, b1, b2 = _ec_pair(
                    u[k, i, 0], u[k, i, 1], u[k, i, 2],
                    u[k, m, 0], u[k, m, 1], u[k, m, 2], par, ec_kind, qn, qw,
                )
                if st != 0:
                    status[k] = 1
                # D-(U_m, U_i) = -D+(U_i, U_m)
                cim = 2.0 * dmat[i, m]
                cmi = 2.0 * dmat[m, i]
                out[k, i, 0] += cim * a0
                out[k, i, 1] += cim * a1
                out[k, i, 2] += cim * a2
                out[k, m, 0] -= cmi * b0
                out[k, m, 1] -= cmi * b1
                out[k, m, 2] -= cmi * b2
        scale = -2.0 / dx[k]
        for i in range(n_nodes):
            for c in range(3):
                out[k, i, c] *= scale

    fm = np.empty((n_el, 3))
    fp = np.empty((n_el, 3))
    for j in prange(n_el):
        kl = j - 1 if j > 0 else n_el - 1
        hl, hvl, bl = u[kl, last, 0], u[kl, last, 1], u[kl, last, 2]
        hr, hvr, br = u[j, 0, 0], u[j, 0, 1], u[j, 0, 2]
        st, a0, a1, a2, b0, b1, b2 = _ec_pair(hl, hvl, bl, hr, hvr, br, par, ec_kind, qn, qw)
        if st != 0:
            status[j] = 1
        q0, q1, q2, prod, prod_llf, alpha = _dissipation(
            hl, hvl, bl, hr, hvr, br, par, diss_kind, blend_mode
        )
        fm[j, 0] = a0 - q0
        fm[j, 1] = a1 - q1
        fm[j, 2] = a2 - q2
        fp[j, 0] = b0 + q0
        fp[j, 1] = b1 + q1
        fp[j, 2] = b2 + q2
        log[j, 0] = prod
        log[j, 1] = prod_llf
        log[j, 2] = alpha

    for k in prange(n_el):
        kr = k + 1 if k < n_el - 1 else 0
        c0 = 2.0 / (wts[0] * dx[k])
        cn = 2.0 / (wts[last] * dx[k])
        for c in range(3):
            out[k, 0, c] -= c0 * fp[k, c]
            out[k, last, c] -= cn * fm[kr, c]
    return out


_rhs_serial = njit(cache=True)(_rhs_impl)
_rhs_parallel = None


def _kernel():
    global _rhs_parallel
    threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    if threads <= 1:
        return _rhs_serial
    if _rhs_parallel is None:
        _rhs_parallel = njit(parallel=True)(_rhs_impl)
    numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
    return _rhs_parallel


def check_field(semi: Semidiscretization, u: np.ndarray, t: float | None = None) -> None:
    if u.shape != semi.field_shape:
        raise ValueError(f"field has shape {u.shape}, expected {semi.field_shape}")
    h = u[..., 0]
    bad = ~(h >= semi.params.h_min)
    if bad.any():
        if not np.isfinite(u).all():
            raise NonFiniteError(f"non-finite values in the solution at t={t}")
        k, i = map(int, np.argwhere(bad)[0])
        raise PositivityError(
            f"water height {h[k, i]!r} below floor at element {k}, node {i}"
            + ("" if t is None else f", t={t}"),
            state=State(*u[k, i]),
            location=(k, i),
            time=t,
        )
    if not np.isfinite(u).all():
        raise NonFiniteError(f"non-finite values in the solution at t={t}")


def rhs(semi: Semidiscretization, u: np.ndarray, t: float = 0.0) -> np.ndarray:
    check_field(semi, u, t)
    u = np.ascontiguousarray(u, dtype=float)
    out = np.empty_like(u)
    status = np.zeros(semi.mesh.n_elements, dtype=np.int64)
    _kernel()(
        u,
        semi.basis.deriv_matrix,
        semi.basis.weights,
        semi.mesh.dx,
        semi.params.packed,
        _VOLUME[semi.volume],
        semi.rule.nodes,
        semi.rule.weights,
        semi._diss_code,
        BLEND_PAPER if semi.strict_paper_blend else BLEND_CLAMP,
        out,
        semi.interface_log,
        status,
    )
    if status.any():
        raise PathError(
            f"entropy-variable quadrature path left the admissible set in element "
            f"{int(np.argmax(status))} at t={t}"
        )
    if semi.source is not None:
        out += semi.source(semi.x, t, u)
    return out


def total_entropy(semi: Semidiscretization, u: np.ndarray) -> float:
    check_field(semi, u)
    s = entropy_density(u, semi.params)
    return float(np.sum(semi.basis.weights[None, :] * 0.5 * semi.mesh.dx[:, None] * s))


def entropy_rate(semi: Semidiscretization, u: np.ndarray, du: np.ndarray) -> float:
    """``sum w_i dx/2 W(U_i)^T dU_i/dt``, the semidiscrete dS/dt."""
    w = entropy_vars_array(u, semi.params)
    quad = semi.basis.weights[None, :] * 0.5 * semi.mesh.dx[:, None]
    return float(np.sum(quad * np.einsum("kic,kic->ki", w, du)))


def integrate_nodal(semi: Semidiscretization, values: np.ndarray) -> np.ndarray:
    """Collocation quadrature of nodal values (K, N+1, ...) over the domain."""
    quad = semi.basis.weights[None, :] * 0.5 * semi.mesh.dx[:, None]
    return np.tensordot(quad, values, axes=([0, 1], [0, 1]))


def interpolate_ic(semi: Semidiscretization, f) -> np.ndarray:
    """Nodal interpolation of ``f: x -> State`` at the mapped LGL points.

    ``f`` may be vectorised (returning a (..., 3) array or a State of
    arrays); otherwise it is called node by node.
    """
    x = semi.x
    try:
        vals = f(x)
        if isinstance(vals, tuple):
            vals = np.stack([np.broadcast_to(np.asarray(c, float), x.shape) for c in vals], axis=-1)
        vals = np.asarray(vals, dtype=float)
        if vals.shape != x.shape + (3,):
            raise ValueError
    except (TypeError, ValueError):
        vals = np.array([[tuple(f(float(xi))) for xi in row] for row in x], dtype=float)
    u = np.ascontiguousarray(vals)
    check_field(semi, u)
    return u


def cfl_timestep(semi: Semidiscretization, u: np.ndarray, cfl: float) -> float:
    """``cfl * min_k dx_k / ((2N+1) lambda_max,k)``."""
    if cfl <= 0.0:
        raise ConfigurationError(f"CFL factor must be positive, got {cfl}")
    speeds = max_wave_speed_array(u, semi.params).max(axis=1)
    n = semi.basis.degree
    return float(cfl * np.min(semi.mesh.dx / ((2 * n + 1) * speeds)))


def evaluate_field(semi: Semidiscretization, u: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate the nodal polynomial at arbitrary positions (periodic wrap).

    Points on an element boundary take the value from the element to their
    right.  Returns an array of shape ``x.shape + (3,)``.
    """
    x = np.asarray(x, dtype=float)
    bounds = semi.mesh.boundaries
    xf = bounds[0] + np.mod(x.reshape(-1) - bounds[0], semi.mesh.length)
    k = np.clip(np.searchsorted(bounds, xf, side="right") - 1, 0, semi.mesh.n_elements - 1)
    xi = 2.0 * (xf - bounds[k]) / semi.mesh.dx[k] - 1.0
    nodes = semi.basis.nodes
    if semi.basis.degree == 0:
        return u[k, 0].reshape(x.shape + (3,))
    # Lagrange basis values, (P, N+1)
    diff = xi[:, None] - nodes[None, :]
    lag = np.ones((len(xf), len(nodes)))
    for j in range(len(nodes)):
        for m in range(len(nodes)):
            if m != j:
                lag[:, j] *= diff[:, m] / (nodes[j] - nodes[m])
    return np.einsum("pj,pjc->pc", lag, u[k]).reshape(x.shape + (3,))
