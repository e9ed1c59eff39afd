"""Quick operator and fluctuation self-test behind ``exnerdg check``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..dgsem import Semidiscretization, entropy_rate, interpolate_ic, rhs, total_entropy, uniform_mesh
from ..fluctuations import (
    ec_fluctuation_closed_form,
    ec_fluctuation_quadrature,
    ec_residual,
    interface_fluctuation,
)
from ..model import State, SveParams, entropy, roe_eigen
from ..sbp import gauss_rule, lgl_basis, sbp_defect
from .scenarios import channel_scenario, manufactured_scenario, pde_residual, well_balanced_scenario


@dataclass
class CheckResult:
    name: str
    value: float
    limit: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.limit)


def _random_pairs(rng, n):
    h = rng.uniform(0.1, 10.0, (n, 2))
    v = rng.uniform(-3.0, 3.0, (n, 2))
    b = rng.uniform(-2.0, 2.0, (n, 2))
    for i in range(n):
        yield State(h[i, 0], h[i, 0] * v[i, 0], b[i, 0]), State(h[i, 1], h[i, 1] * v[i, 1], b[i, 1])


def _scale(ul, ur, p):
    return max(1.0, abs(entropy(ul, p)), abs(entropy(ur, p)))


def _sbp():
    return max(sbp_defect(lgl_basis(n)) for n in range(1, 9))


def _ec(constructor):
    def run():
        p = SveParams()
        rng = np.random.default_rng(1)
        worst = 0.0
        for ul, ur in _random_pairs(rng, 500):
            worst = max(worst, abs(ec_residual(ul, ur, constructor(ul, ur, p), p)) / _scale(ul, ur, p))
        return worst
    return run


def _es_production():
    p = SveParams()
    rng = np.random.default_rng(2)
    worst = -np.inf
    for ul, ur in _random_pairs(rng, 500):
        pair, _ = interface_fluctuation(ul, ur, p, "roe_blend")
        worst = max(worst, -ec_residual(ul, ur, pair, p) / _scale(ul, ur, p))
    return max(worst, 0.0)


def _eigen():
    p = SveParams()
    u = State(2.0, 3.0, 0.5)
    eig = roe_eigen(u, p)
    from ..model import generalized_jacobian

    a = generalized_jacobian(u, p)
    return float(np.abs(a @ eig.right_vectors - eig.right_vectors * eig.lambdas).max())


def _channel_semi(**kw):
    sc = channel_scenario()
    semi = Semidiscretization(lgl_basis(4), uniform_mesh(sc.domain, 128), sc.params, **kw)
    return semi, interpolate_ic(semi, sc.initial)


def _ec_rate():
    semi, u = _channel_semi(surface="ec")
    return abs(entropy_rate(semi, u, rhs(semi, u))) / abs(total_entropy(semi, u))


def _es_rate():
    semi, u = _channel_semi(surface="es", dissipation="roe_blend")
    return max(entropy_rate(semi, u, rhs(semi, u)) / abs(total_entropy(semi, u)), 0.0)


def _free_stream():
    semi, _ = _channel_semi()
    u = np.empty(semi.field_shape)
    u[...] = (3.0, 2.0, 0.5)
    return float(np.abs(rhs(semi, u)).max())


def _lake_at_rest():
    sc = well_balanced_scenario()
    worst = 0.0
    for n in (0, 1, 2):
        semi = Semidiscretization(lgl_basis(n), uniform_mesh(sc.domain, 16), sc.params)
        worst = max(worst, float(np.abs(rhs(semi, interpolate_ic(semi, sc.initial))).max()))
    return worst / sc.params.g


def _mms():
    sc = manufactured_scenario()
    rng = np.random.default_rng(3)
    x = rng.uniform(*sc.domain, 200)
    t = rng.uniform(0.0, 1.0, 200)
    return float(np.abs(pde_residual(sc, x, t)).max())


CHECKS: list[tuple[str, Callable[[], float], float]] = [
    ("SBP property N=1..8", _sbp, 1e-14),
    ("EC residual, closed form", _ec(ec_fluctuation_closed_form), 1e-12),
    ("EC residual, quadrature(3)", _ec(lambda a, b, p: ec_fluctuation_quadrature(a, b, p, gauss_rule(3))), 1e-10),
    ("ES interface production > 0", _es_production, 1e-12),
    ("Roe eigen residual", _eigen, 1e-10),
    ("free-stream rhs", _free_stream, 1e-13),
    ("lake-at-rest rhs / g", _lake_at_rest, 1e-11),
    ("EC semidiscrete entropy rate", _ec_rate, 1e-11),
    ("ES semidiscrete entropy rate > 0", _es_rate, 1e-11),
    ("manufactured source residual", _mms, 1e-6),
]


def run_checks() -> list[CheckResult]:
    results = []
    for name, fn, limit in CHECKS:
        try:
            value = float(fn())
        except Exception:  # a crashing check is a failed check
            value = float("nan")
        results.append(CheckResult(name, value, limit))
    return results


def format_results(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'value':>10}  {'limit':>8}  result"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {r.value:10.2e}  {r.limit:8.0e}  {'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines)
