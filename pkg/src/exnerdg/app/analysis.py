from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..dgsem import Semidiscretization, integrate_nodal

VARIABLES = ("h", "hv", "b")


def l2_error(semi: Semidiscretization, u: np.ndarray, exact, t: float) -> np.ndarray:
    """Per-variable discrete L2 error with the LGL collocation quadrature."""
    diff = u - exact(semi.x, t)
    return np.sqrt(integrate_nodal(semi, diff**2))


def eoc(errors: list[float]) -> list[float]:
    """log2 ratios of consecutive errors for a sequence of mesh doublings."""
    return [math.log2(a / b) if a > 0 and b > 0 else math.nan for a, b in zip(errors, errors[1:])]


@dataclass
class EocReport:
    resolutions: list[int]
    l2_errors: dict[str, list[float]]
    eoc: dict[str, list[float]] = field(init=False)
    degree: int | None = None
    failure: str | None = None

    def __post_init__(self):
        self.eoc = {v: eoc(e) for v, e in self.l2_errors.items()}

    @classmethod
    def from_rows(cls, resolutions, rows, **kw) -> "EocReport":
        rows = np.asarray(rows, dtype=float).reshape(len(resolutions), len(VARIABLES))
        return cls(list(resolutions), {v: rows[:, j].tolist() for j, v in enumerate(VARIABLES)}, **kw)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def table(self) -> str:
        head = f"{'K':>6}" + "".join(f"  {'L2(' + v + ')':>11}  {'EOC':>5}" for v in self.l2_errors)
        lines = [head]
        for n, k in enumerate(self.resolutions):
            cells = []
            for v, errs in self.l2_errors.items():
                rate = self.eoc[v][n - 1] if n else math.nan
                cells.append(f"  {errs[n]:11.3e}  {'' if n == 0 else f'{rate:5.2f}':>5}")
            lines.append(f"{k:>6}" + "".join(cells))
        return "\n".join(lines)
