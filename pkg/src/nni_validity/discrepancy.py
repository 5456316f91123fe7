"""Relative discrepancy between nearest-neighbour and all-neighbour evolutions.

For a signal F sampled over [0, T],

    delta_J = sqrt( int |F_ani - F_nni|^2 dtau / int |F_ani|^2 dtau )

with both integrals by composite Simpson. Two routes compute it:

* the sampled route (``delta_j``, ``delta_j_pair``) builds amplitude series on
  the grid and integrates them;
* the spectral route (``PairIntegrals``) expands |p|^2 and Re(p_ani p_nni*)
  over eigenpairs and evaluates the Simpson sum of each phase in closed form.
  It yields the same Simpson value for every (j, k) at once and is what the
  alpha scans use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain_model import ChainSpec, build_coupling_matrix
from .errors import DegenerateSignalError, ValidationError
from .propagator import (
    AmplitudeSeries,
    SpectralDecomposition,
    amplitude_series,
    amplitude_tensor,
    decompose,
    spectral_decomposition,
)
from .quadrature import TauGrid, simpson, simpson_phase_sum

DEFAULT_EPSILON = 0.01
DEFAULT_GRID_STEP = 0.05
DEGENERATE_FLOOR = 1e-300
# relative slack under which two pair discrepancies count as tied for the argmax
TIE_RTOL = 1e-12
# round-off in the numerator, relative to the size of the terms it is built from
ROUNDOFF = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class Tolerance:
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 1:
            raise ValidationError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")

    def accepts(self, value: float) -> bool:
        return value < self.epsilon


@dataclass(frozen=True)
class DiscrepancyResult:
    value: float
    numerator_sq: float
    denominator_sq: float
    horizon: float
    pair: tuple[int, int] | None = None


def mirror_pair(n: int, pair: tuple[int, int]) -> tuple[int, int]:
    """Image of (j, k) under j -> N+1-j, ordered so the first index is smallest."""
    j, k = pair
    a, b = n + 1 - j, n + 1 - k
    return (a, b) if a <= b else (b, a)


def pointwise_discrepancy(f_full: complex, f_nni: complex) -> float:
    if abs(f_full) == 0:
        raise ZeroDivisionError(
            "full-model value is zero at this instant; the pointwise ratio is undefined, "
            "use the integral criterion delta_j instead"
        )
    return abs(f_full - f_nni) / abs(f_full)


def _result(num: float, den: float, horizon: float, pair=None) -> DiscrepancyResult:
    if den < DEGENERATE_FLOOR:
        raise DegenerateSignalError(
            f"full-model signal has vanishing norm ({den!r}) over the horizon {horizon}"
        )
    num = max(num, 0.0)
    return DiscrepancyResult(float(np.sqrt(num / den)), num, den, horizon, pair)


def delta_j(
    signal_full,
    signal_nni,
    step: float | None = None,
    horizon: float | None = None,
    pair: tuple[int, int] | None = None,
) -> DiscrepancyResult:
    """Integral discrepancy of two signals sampled on one uniform grid.

    Signals are either ``AmplitudeSeries`` (grid taken from them) or plain
    arrays together with ``step``. The 1/T normalisations cancel and are not
    applied.
    """
    if isinstance(signal_full, AmplitudeSeries) or isinstance(signal_nni, AmplitudeSeries):
        if not (isinstance(signal_full, AmplitudeSeries) and isinstance(signal_nni, AmplitudeSeries)):
            raise ValidationError("both signals must be AmplitudeSeries or both arrays")
        if signal_full.grid != signal_nni.grid:
            raise ValidationError(
                f"signals sampled on different grids: {signal_full.grid} vs {signal_nni.grid}"
            )
        if pair is None and (signal_full.source, signal_full.target) == (
            signal_nni.source,
            signal_nni.target,
        ):
            pair = (signal_full.source, signal_full.target)
        step = signal_full.grid.step
        signal_full, signal_nni = signal_full.values, signal_nni.values
    elif step is None:
        raise ValidationError("a grid step is required for array signals")

    full = np.asarray(signal_full)
    nni = np.asarray(signal_nni)
    if full.shape != nni.shape or full.ndim != 1:
        raise ValidationError(f"signals must be 1-D with equal length, got {full.shape} and {nni.shape}")
    grid_horizon = step * (full.shape[0] - 1)
    if horizon is not None and abs(grid_horizon - horizon) > 2 * step + 1e-9:
        raise ValidationError(
            f"grid covers [0, {grid_horizon}] but the requested horizon is {horizon}"
        )
    num = float(simpson(np.abs(full - nni) ** 2, step))
    den = float(simpson(np.abs(full) ** 2, step))
    return _result(num, den, grid_horizon, pair)


def delta_j_pair(
    n: int,
    alpha: float,
    j: int,
    k: int,
    horizon: float,
    grid_step: float = DEFAULT_GRID_STEP,
) -> DiscrepancyResult:
    """Sampled-route discrepancy of the single amplitude p_jk."""
    grid = TauGrid.covering(horizon, grid_step)
    full = amplitude_series(ChainSpec.ani(n, alpha), j, k, grid)
    nni = amplitude_series(ChainSpec.nni(n, alpha), j, k, grid)
    return delta_j(full, nni, pair=(j, k))


def _phase_kernel(lam_a: np.ndarray, lam_b: np.ndarray, grid: TauGrid) -> np.ndarray:
    """Re of the Simpson sum of exp(-i (lam_a[q] - lam_b[r]) tau)."""
    # contiguous copy: the strided .real view would keep matmul off BLAS
    return np.ascontiguousarray(simpson_phase_sum(lam_a[:, None] - lam_b[None, :], grid).real)


def _quadratic_rows(rows_a: np.ndarray, kernel: np.ndarray, rows_b: np.ndarray) -> np.ndarray:
    return np.einsum("pq,pq->p", rows_a @ kernel, rows_b)


class PairIntegrals:
    """Simpson integrals for a fixed chain length and grid, swept over alpha.

    ``pairs`` is an (P, 2) array of 1-based (j, k). The nearest-neighbour
    matrix does not depend on alpha, so its spectral rows and self-integral
    are computed once here.
    """

    def __init__(self, n: int, grid: TauGrid, pairs: np.ndarray | None = None):
        if pairs is None:
            pairs = upper_pairs(n)
        self.n = n
        self.grid = grid
        self.pairs = np.asarray(pairs, dtype=int)
        nni = spectral_decomposition(ChainSpec.nni(n, 1.0))
        self._nni = nni
        self._rows_nni = self._rows(nni)
        self.nni_sq = _quadratic_rows(
            self._rows_nni, _phase_kernel(nni.eigenvalues, nni.eigenvalues, grid), self._rows_nni
        )

    def _rows(self, decomp: SpectralDecomposition) -> np.ndarray:
        v = decomp.eigenvectors
        return v[self.pairs[:, 0] - 1] * v[self.pairs[:, 1] - 1]

    def evaluate(self, alpha: float) -> tuple[np.ndarray, np.ndarray]:
        """(numerator_sq, denominator_sq) per pair at exponent ``alpha``."""
        # not via the cache: each alpha of a scan is visited once
        ani = decompose(build_coupling_matrix(ChainSpec.ani(self.n, alpha)))
        rows_ani = self._rows(ani)
        ani_sq = _quadratic_rows(
            rows_ani, _phase_kernel(ani.eigenvalues, ani.eigenvalues, self.grid), rows_ani
        )
        cross = _quadratic_rows(
            rows_ani, _phase_kernel(ani.eigenvalues, self._nni.eigenvalues, self.grid), self._rows_nni
        )
        num = np.maximum(ani_sq + self.nni_sq - 2.0 * cross, 0.0)
        return num, ani_sq

    def discrepancies(self, alpha: float) -> np.ndarray:
        num, den = self.evaluate(alpha)
        if np.any(den < DEGENERATE_FLOOR):
            raise DegenerateSignalError(
                f"an all-neighbour amplitude has vanishing norm for N={self.n}, alpha={alpha}"
            )
        return np.sqrt(num / den)


def upper_pairs(n: int) -> np.ndarray:
    """All (j, k) with 1 <= j <= k <= n in lexicographic order."""
    j, k = np.triu_indices(n)
    return np.stack([j + 1, k + 1], axis=1)


def tie_slack(values: np.ndarray, den: np.ndarray, nni_sq: np.ndarray) -> np.ndarray:
    """Round-off bound on each discrepancy value.

    The spectral numerator is a difference of terms of size den + nni_sq, so
    its absolute error scales with them, not with the (possibly tiny) result.
    An error d in value**2 moves the value by d / (sqrt(value**2 + d) + value).
    """
    values = np.asarray(values, dtype=float)
    d = ROUNDOFF * (np.asarray(den) + np.asarray(nni_sq)) / np.asarray(den)
    return TIE_RTOL * values + d / (np.sqrt(values**2 + d) + values)


def select_max(values: np.ndarray, pairs: np.ndarray, slack: np.ndarray | None = None) -> int:
    """Index of the lexicographically first pair whose value ties the maximum.

    Two values tie when they differ by less than their combined ``slack``
    (default: relative TIE_RTOL), so mirror twins equal up to round-off
    resolve to the same pair whichever route computed them.
    """
    values = np.asarray(values, dtype=float)
    if slack is None:
        slack = TIE_RTOL * values
    i_top = int(np.argmax(values))
    tied = np.flatnonzero(values + slack >= values[i_top] - slack[i_top])
    return int(tied[0])


def delta_j_max(
    n: int,
    alpha: float,
    horizon: float,
    grid_step: float = DEFAULT_GRID_STEP,
    method: str = "spectral",
) -> tuple[DiscrepancyResult, tuple[int, int]]:
    """Largest discrepancy over all amplitudes p_jk with j <= k, and its pair.

    ``method="sampled"`` builds the full amplitude tensors on the grid instead
    of using the closed-form sums; it is O(N^2 * len(grid)) in memory and
    intended for cross-checks on short chains.
    """
    grid = TauGrid.covering(horizon, grid_step)
    pairs = upper_pairs(n)
    if method == "spectral":
        integrals = PairIntegrals(n, grid, pairs)
        num, den = integrals.evaluate(alpha)
        nni_sq = integrals.nni_sq
    elif method == "sampled":
        taus = grid.taus
        p_ani = amplitude_tensor(spectral_decomposition(ChainSpec.ani(n, alpha)), taus)
        p_nni = amplitude_tensor(spectral_decomposition(ChainSpec.nni(n, alpha)), taus)
        jj, kk = pairs[:, 0] - 1, pairs[:, 1] - 1
        a, b = p_ani[:, jj, kk], p_nni[:, jj, kk]
        num = simpson(np.abs(a - b) ** 2, grid.step)
        den = simpson(np.abs(a) ** 2, grid.step)
        nni_sq = simpson(np.abs(b) ** 2, grid.step)
    else:
        raise ValidationError(f"unknown method {method!r}")
    if np.any(den < DEGENERATE_FLOOR):
        raise DegenerateSignalError(
            f"an all-neighbour amplitude has vanishing norm for N={n}, alpha={alpha}"
        )
    values = np.sqrt(np.maximum(num, 0.0) / den)
    i = select_max(values, pairs, tie_slack(values, den, nni_sq))
    pair = (int(pairs[i, 0]), int(pairs[i, 1]))
    return _result(float(num[i]), float(den[i]), grid.horizon, pair), pair
