"""Least-squares fit of alpha_c(N) ~ a ln(N - b) + c.

The model is linear in (a, c) for fixed b, so the fit profiles them out in
closed form and searches the remaining scalar b by golden section.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ValidationError

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
B_MARGIN = 0.5


@dataclass(frozen=True)
class LogFit:
    a: float
    b: float
    c: float
    sse: float
    n_points: int
    n_max: int

    def predict(self, n) -> np.ndarray:
        return self.a * np.log(np.asarray(n, dtype=float) - self.b) + self.c

    def to_record(self) -> dict:
        return asdict(self)


def _linear_fit(n: np.ndarray, y: np.ndarray, b: float) -> tuple[float, float, float]:
    x = np.log(n - b)
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    sxx = float(dx @ dx)
    a = float(dx @ (y - ym)) / sxx
    c = float(ym - a * xm)
    r = y - (a * x + c)
    return a, c, float(r @ r)


def _prepare(points) -> tuple[np.ndarray, np.ndarray]:
    pts = sorted((float(n), float(v)) for n, v in points)
    if len(pts) < 4:
        raise ValidationError(f"need at least 4 points for a 3-parameter fit, got {len(pts)}")
    n = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(n < 2):
        raise ValidationError("chain lengths must be >= 2")
    if len(np.unique(n)) != len(n):
        if len(np.unique(n)) == 1:
            raise ValidationError("degenerate design: all chain lengths are equal")
        raise ValidationError("chain lengths must be distinct")
    return n, y


def sse_at(points, a: float, b: float, c: float) -> float:
    n, y = _prepare(points)
    r = y - (a * np.log(n - b) + c)
    return float(r @ r)


def fit_log(points, b_tol: float = 1e-9, b_lower: float = 0.0) -> LogFit:
    """Fit (a, b, c) to (N, alpha_c) pairs, with b searched on (b_lower, min N - 0.5]."""
    n, y = _prepare(points)
    lo, hi = b_lower, float(n.min()) - B_MARGIN
    if hi <= lo:
        raise ValidationError(f"no admissible b: search interval ({lo}, {hi}] is empty")

    def profile(b: float) -> float:
        return _linear_fit(n, y, b)[2]

    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1, f2 = profile(x1), profile(x2)
    while hi - lo > b_tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = profile(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = profile(x2)
    b = x1 if f1 <= f2 else x2
    a, c, sse = _linear_fit(n, y, b)
    return LogFit(a=a, b=b, c=c, sse=sse, n_points=len(n), n_max=int(n.max()))


def a_vs_nmax(points, nmax_grid) -> list[tuple[int, float]]:
    """Leading coefficient a from fits restricted to N <= N_max, for each N_max."""
    pts = sorted((float(n), float(v)) for n, v in points)
    out = []
    for n_max in nmax_grid:
        subset = [p for p in pts if p[0] <= n_max]
        if len(subset) < 4:
            raise ValidationError(
                f"N_max={n_max} leaves only {len(subset)} points; at least 4 are needed"
            )
        out.append((int(n_max), fit_log(subset).a))
    return out
