"""One-excitation coupling matrix of an open homogeneous XX chain.

Sites are labelled 1..N in every public interface. The matrix returned here is
the Hamiltonian restricted to single-flip states, divided by the
nearest-neighbour coupling, so adjacent sites always hop with amplitude 1/2 and
sites at distance m (m <= M) hop with amplitude 1 / (2 m**alpha).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

HOPPING = 0.5


@dataclass(frozen=True)
class ChainSpec:
    n_spins: int
    neighbor_range: int
    alpha: float

    def __post_init__(self) -> None:
        if int(self.n_spins) != self.n_spins or self.n_spins < 2:
            raise ValidationError(f"n_spins must be an integer >= 2, got {self.n_spins!r}")
        if int(self.neighbor_range) != self.neighbor_range or not (
            1 <= self.neighbor_range <= self.n_spins - 1
        ):
            raise ValidationError(
                f"neighbor_range must lie in [1, {self.n_spins - 1}] for "
                f"n_spins={self.n_spins}, got {self.neighbor_range!r}"
            )
        if not np.isfinite(self.alpha) or self.alpha <= 0:
            raise ValidationError(f"alpha must be a positive finite number, got {self.alpha!r}")
        # normalise numpy scalars so equal specs hash equally in caches
        object.__setattr__(self, "n_spins", int(self.n_spins))
        object.__setattr__(self, "neighbor_range", int(self.neighbor_range))
        object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def nni(cls, n_spins: int, alpha: float) -> "ChainSpec":
        return cls(n_spins, 1, alpha)

    @classmethod
    def ani(cls, n_spins: int, alpha: float) -> "ChainSpec":
        return cls(n_spins, n_spins - 1, alpha)

    @property
    def is_nni(self) -> bool:
        return self.neighbor_range == 1

    @property
    def is_ani(self) -> bool:
        return self.neighbor_range == self.n_spins - 1


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    spec: ChainSpec
    entries: np.ndarray

    @property
    def size(self) -> int:
        return self.spec.n_spins

    def coupling(self, j: int, k: int) -> float:
        """Entry between 1-based sites ``j`` and ``k``."""
        n = self.size
        if not (1 <= j <= n and 1 <= k <= n):
            raise IndexError(f"sites ({j}, {k}) outside 1..{n}")
        return float(self.entries[j - 1, k - 1])


def build_coupling_matrix(spec: ChainSpec) -> CouplingMatrix:
    n, m = spec.n_spins, spec.neighbor_range
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :])
    entries = np.zeros((n, n))
    band = (dist >= 1) & (dist <= m)
    # exact 1/2 on the first off-diagonal regardless of alpha
    entries[band] = HOPPING / dist[band].astype(float) ** spec.alpha
    entries.setflags(write=False)
    return CouplingMatrix(spec, entries)


def row_sum_bound(n_spins: int, alpha: float) -> float:
    """Upper bound on the spectral radius of any coupling matrix for this N and alpha.

    Each row sums two one-sided tails of 1/(2 m**alpha), each at most half of
    sum_{m=1}^{N-1} m**-alpha.
    """
    m = np.arange(1, n_spins, dtype=float)
    return float(np.sum(m ** -alpha))
