"""Legendre-Gauss-Lobatto collocation operators and Gauss rules on [0, 1].

The LGL operators (nodes, weights, derivative matrix) form a diagonal-norm
summation-by-parts (SBP) operator: with ``Q = diag(w) @ D`` and
``B = diag(-1, 0, ..., 0, 1)`` one has ``Q + Q.T == B`` up to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

MAX_LGL_DEGREE = 20
MAX_GAUSS_POINTS = 10


@dataclass(frozen=True, eq=False)
class LobattoBasis:
    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    deriv_matrix: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.degree + 1

    @property
    def q_matrix(self) -> np.ndarray:
        return self.weights[:, None] * self.deriv_matrix

    @property
    def boundary_matrix(self) -> np.ndarray:
        b = np.zeros((self.n_nodes, self.n_nodes))
        b[0, 0] -= 1.0
        b[-1, -1] += 1.0
        return b


@dataclass(frozen=True, eq=False)
class GaussRule:
    n_points: int
    nodes: np.ndarray
    weights: np.ndarray


def _legendre_and_derivative(n: int, x: np.ndarray):
    """P_n(x) and P_n'(x) via the three-term recurrence."""
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev, np.zeros_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    # derivative from P_n and P_{n-1}; only valid in the interior
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def _lgl_nodes(n: int, tol: float = 1e-15, max_iter: int = 100) -> np.ndarray:
    # Newton on (1 - x^2) P_n'(x) = n (P_{n-1} - x P_n), seeded with
    # Chebyshev-Gauss-Lobatto points; see Hesthaven & Warburton, Alg. 3.1.
    x = -np.cos(np.pi * np.arange(n + 1) / n)
    vander = np.zeros((n + 1, n + 1))
    for _ in range(max_iter):
        x_old = x.copy()
        vander[:, 0] = 1.0
        vander[:, 1] = x
        for k in range(2, n + 1):
            vander[:, k] = ((2 * k - 1) * x * vander[:, k - 1] - (k - 1) * vander[:, k - 2]) / k
        x = x_old - (x * vander[:, n] - vander[:, n - 1]) / ((n + 1) * vander[:, n])
        if np.max(np.abs(x - x_old)) <= tol:
            break
    x[0], x[-1] = -1.0, 1.0
    # enforce exact symmetry about 0
    x = 0.5 * (x - x[::-1])
    if n % 2 == 0:
        x[n // 2] = 0.0
    return x


def _barycentric_derivative(x: np.ndarray) -> np.ndarray:
    n = len(x)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    bary = 1.0 / np.prod(diff, axis=1)
    d = (bary[None, :] / bary[:, None]) / diff
    np.fill_diagonal(d, 0.0)
    # negative row sum: derivative of a constant is exactly zero
    d[np.arange(n), np.arange(n)] = -d.sum(axis=1)
    return d


def lgl_basis(degree: int) -> LobattoBasis:
    """LGL nodes, weights and derivative matrix for polynomial degree N.

    ``degree == 0`` is accepted as the one-node finite-volume limit
    (node 0, weight 2, zero derivative matrix) so that P0 runs share the
    same assembly as higher degrees.
    """
    if not isinstance(degree, (int, np.integer)) or not 0 <= degree <= MAX_LGL_DEGREE:
        raise ConfigurationError(
            f"polynomial degree must be an integer in [0, {MAX_LGL_DEGREE}], got {degree!r}"
        )
    degree = int(degree)
    if degree == 0:
        return LobattoBasis(0, np.zeros(1), np.full(1, 2.0), np.zeros((1, 1)))
    x = _lgl_nodes(degree)
    p_n, _ = _legendre_and_derivative(degree, x)
    w = 2.0 / (degree * (degree + 1) * p_n**2)
    d = _barycentric_derivative(x)
    for arr in (x, w, d):
        arr.setflags(write=False)
    return LobattoBasis(degree, x, w, d)


def gauss_rule(n_points: int) -> GaussRule:
    """n-point Gauss-Legendre rule mapped to [0, 1]."""
    if not isinstance(n_points, (int, np.integer)) or not 1 <= n_points <= MAX_GAUSS_POINTS:
        raise ConfigurationError(
            f"Gauss rule size must be an integer in [1, {MAX_GAUSS_POINTS}], got {n_points!r}"
        )
    xi, wi = np.polynomial.legendre.leggauss(int(n_points))
    s = 0.5 * (xi + 1.0)
    s = 0.5 * (s + (1.0 - s[::-1]))  # symmetric about 1/2 to the last bit
    w = 0.5 * wi
    w = 0.5 * (w + w[::-1])
    for arr in (s, w):
        arr.setflags(write=False)
    return GaussRule(int(n_points), s, w)


def sbp_defect(basis: LobattoBasis) -> float:
    """Largest entry of ``|Q + Q^T - B|``."""
    q = basis.q_matrix
    return float(np.max(np.abs(q + q.T - basis.boundary_matrix)))
