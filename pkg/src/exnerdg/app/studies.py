"""The three studies: convergence, entropy conservation, plain simulation."""

from __future__ import annotations

import logging
import statistics
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from ..dgsem import interpolate_ic, rhs, total_entropy
from ..errors import SolverError
from ..timeint import integrate
from .analysis import EocReport, l2_error
from .config import RunConfig, parse_fluctuation
from .io import write_json, write_series, write_snapshot, write_table

log = logging.getLogger(__name__)


def run_convergence(config: RunConfig) -> EocReport:
    """Manufactured-solution errors at t_end for each of ``mesh.resolutions``.

    A failing run stops the study; the report then holds the completed rows
    and ``failure`` describes what went wrong.
    """
    sc = config.scenario()
    if sc.exact is None:
        raise SolverError(f"scenario {sc.name!r} has no exact solution to converge to")
    resolutions = list(config.mesh.resolutions or (config.mesh.elements,))
    tcfg = config.time_config()
    done, rows, failure = [], [], None
    for k in resolutions:
        semi = config.semidiscretization(elements=k)
        u0 = interpolate_ic(semi, sc.initial)
        try:
            u, _ = integrate(semi, u0, replace(tcfg, callback_interval=tcfg.max_steps))
        except SolverError as exc:
            failure = f"K={k}: {exc}"
            log.error("convergence run aborted at %s", failure)
            break
        done.append(k)
        rows.append(l2_error(semi, u, sc.exact, tcfg.t_end))
        log.info("K=%d  L2 = %s", k, rows[-1])
    return EocReport.from_rows(done, rows, degree=config.mesh.degree, failure=failure)


@dataclass
class EntropyStudyRow:
    fluctuation: str
    max_rate: float  # max over logged steps of |dS/dt|
    max_rate_per_length: float  # the same divided by the domain length
    rhs_seconds: float  # median wall time of one rhs call
    total_entropy: float
    failure: str | None = None


def time_rhs(semi, u, calls: int = 100, warmup: int = 10) -> float:
    """Median wall time of ``calls`` rhs evaluations after ``warmup`` discarded ones."""
    for _ in range(warmup):
        rhs(semi, u)
    samples = []
    for _ in range(calls):
        t0 = time.perf_counter()
        rhs(semi, u)
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def run_entropy_study(config: RunConfig) -> list[EntropyStudyRow]:
    """EC-everywhere runs, one per fluctuation in ``scheme.study_fluctuations``."""
    sc = config.scenario()
    tcfg = config.time_config()
    rows = []
    for spec in config.scheme.study_fluctuations:
        volume, n = parse_fluctuation(spec)
        semi = config.semidiscretization(volume=volume, quad_points=n, surface="ec")
        u0 = interpolate_ic(semi, sc.initial)
        s0 = total_entropy(semi, u0)
        cost = time_rhs(semi, u0, config.time.timing_calls, config.time.warmup_calls)
        try:
            _, series = integrate(semi, u0, tcfg)
            rate = float(np.max(np.abs(series.entropy_rate)))
            failure = None
        except SolverError as exc:
            rate, failure = float("nan"), str(exc)
            log.error("%s: %s", spec, exc)
        rows.append(EntropyStudyRow(spec, rate, rate / semi.mesh.length, cost, s0, failure))
        log.info("%-14s max|dS/dt| = %.3e  rhs = %.3e s", spec, rate, cost)
    return rows


def entropy_study_table(rows: list[EntropyStudyRow]) -> str:
    lines = [f"{'fluctuation':<14} {'max|dS/dt|':>12} {'per length':>12} {'t_rhs [s]':>11}"]
    for r in rows:
        lines.append(
            f"{r.fluctuation:<14} {r.max_rate:12.3e} {r.max_rate_per_length:12.3e} {r.rhs_seconds:11.3e}"
            + (f"  FAILED: {r.failure}" if r.failure else "")
        )
    return "\n".join(lines)


def run_simulation(config: RunConfig, output_dir=None) -> dict:
    """Run one configuration, writing snapshots and the entropy time series.

    Snapshots are written at the initial state, at the first callback step
    at or past each multiple of ``output.snapshot_interval`` and at the final
    time.  Returns a summary with the written paths.
    """
    out = Path(output_dir or config.output.directory)
    prefix = config.output.prefix
    sc = config.scenario()
    semi = config.semidiscretization()
    tcfg = config.time_config()
    u0 = interpolate_ic(semi, sc.initial)
    every = config.output.snapshot_interval
    written = []
    steps = [0]

    def snapshot(t, u, n):
        crossed = every and n // every > steps[0] // every
        steps[0] = n
        if n == 0 or t == tcfg.t_end or crossed:
            name = f"{prefix}snapshot_{n:08d}.csv"
            written.append(str(write_snapshot(out / name, semi.x, u)))

    start = time.perf_counter()
    u, series = integrate(semi, u0, tcfg, callbacks=[snapshot])
    elapsed = time.perf_counter() - start
    summary = {
        "scenario": sc.name,
        "t_end": tcfg.t_end,
        "steps": steps[0],
        "wall_seconds": elapsed,
        "snapshots": written,
        "total_entropy_initial": series.total_entropy[0] if len(series) else total_entropy(semi, u0),
        "total_entropy_final": total_entropy(semi, u),
    }
    if sc.exact is not None:
        summary["l2_error"] = l2_error(semi, u, sc.exact, tcfg.t_end).tolist()
        summary["max_deviation"] = np.abs(u - sc.exact(semi.x, tcfg.t_end)).max(axis=(0, 1)).tolist()
    if config.output.timeseries:
        summary["timeseries"] = str(write_series(out / f"{prefix}timeseries.csv", series))
    write_json(out / f"{prefix}summary.json", summary)
    return summary


def write_entropy_study(rows: list[EntropyStudyRow], path) -> Path:
    fields = list(asdict(rows[0])) if rows else list(EntropyStudyRow.__dataclass_fields__)
    return write_table(path, fields, [[getattr(r, f) for f in fields] for r in rows])
