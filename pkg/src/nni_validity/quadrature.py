"""Uniform tau grids and composite Simpson quadrature.

Besides the usual sampled rule this module evaluates the Simpson sum of a pure
phase, sum_s w_s exp(-i w tau_s), in closed form. Every quadratic form of
amplitudes built from a spectral decomposition reduces to these sums, which is
what makes exhaustive alpha scans affordable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# slack when snapping T / step to an integer, so 40 / 0.05 does not round up to 802
_SNAP_SLACK = 1e-9


@dataclass(frozen=True)
class TauGrid:
    """Uniform grid tau_s = s * step for s = 0..n_intervals."""

    step: float
    n_intervals: int

    def __post_init__(self) -> None:
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ValidationError(f"grid step must be positive, got {self.step!r}")
        if self.n_intervals < 0:
            raise ValidationError("n_intervals must be non-negative")

    @classmethod
    def covering(cls, horizon: float, step: float, even: bool = True) -> "TauGrid":
        """Smallest grid with the given step reaching at least ``horizon``.

        With ``even`` the interval count is rounded up to the next even number,
        as composite Simpson requires.
        """
        if not (horizon > 0 and math.isfinite(horizon)):
            raise ValidationError(f"horizon must be positive, got {horizon!r}")
        if not (step > 0 and math.isfinite(step)):
            raise ValidationError(f"grid step must be positive, got {step!r}")
        n = math.ceil(horizon / step - _SNAP_SLACK)
        n = max(n, 1)
        if even and n % 2:
            n += 1
        return cls(step, n)

    @property
    def horizon(self) -> float:
        return self.step * self.n_intervals

    @property
    def taus(self) -> np.ndarray:
        return self.step * np.arange(self.n_intervals + 1)

    def __len__(self) -> int:
        return self.n_intervals + 1


def simpson_weights(n_intervals: int, step: float) -> np.ndarray:
    if n_intervals < 2 or n_intervals % 2:
        raise ValidationError(
            f"composite Simpson needs an even, positive interval count; got {n_intervals}"
        )
    w = np.full(n_intervals + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (step / 3.0)


def simpson(values: np.ndarray, step: float, axis: int = 0) -> np.ndarray:
    """Composite Simpson integral of samples on a uniform grid along ``axis``."""
    values = np.asarray(values)
    w = simpson_weights(values.shape[axis] - 1, step)
    return np.tensordot(np.moveaxis(values, axis, -1), w, axes=([-1], [0]))


def _geometric_phase_sum(theta: np.ndarray, count: int) -> np.ndarray:
    """sum_{m=0}^{count-1} exp(i m theta), in Dirichlet-kernel form.

    The ratio sin(count*theta/2) / sin(theta/2) stays accurate as theta -> 0,
    unlike (1 - z**count) / (1 - z).
    """
    half = 0.5 * theta
    s = np.sin(half)
    tiny = np.abs(s) < 1e-300
    ratio = np.where(tiny, float(count), np.sin(count * half) / np.where(tiny, 1.0, s))
    return np.exp(1j * half * (count - 1)) * ratio


def simpson_phase_sum(omega: np.ndarray, grid: TauGrid) -> np.ndarray:
    """Composite Simpson sum of exp(-i omega tau) over ``grid``, for each omega.

    Identical (up to rounding) to ``simpson(np.exp(-1j * omega * grid.taus), grid.step)``
    but costs O(1) per frequency instead of O(len(grid)).
    """
    n = grid.n_intervals
    if n < 2 or n % 2:
        raise ValidationError(
            f"composite Simpson needs an even, positive interval count; got {n}"
        )
    theta = -np.asarray(omega, dtype=float) * grid.step
    even = _geometric_phase_sum(2.0 * theta, n // 2 + 1)
    odd = np.exp(1j * theta) * _geometric_phase_sum(2.0 * theta, n // 2)
    ends = 1.0 + np.exp(1j * theta * n)
    return (grid.step / 3.0) * (2.0 * even + 4.0 * odd - ends)
