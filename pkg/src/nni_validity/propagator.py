"""Transition amplitudes p_jk(tau) = <k| exp(-i A tau) |j> for the coupling matrix A.

A is real symmetric, so one eigendecomposition A = V diag(lam) V^T gives every
amplitude at every time: p_jk(tau) = sum_q V_jq V_kq exp(-i lam_q tau).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chain_model import ChainSpec, CouplingMatrix, build_coupling_matrix
from .errors import EigensolverError, ValidationError
from .quadrature import TauGrid


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    spec: ChainSpec
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def size(self) -> int:
        return self.eigenvalues.shape[0]

    def overlap_weights(self, j: int, k: int) -> np.ndarray:
        """Weights c_q = V_jq V_kq such that p_jk(tau) = sum_q c_q exp(-i lam_q tau)."""
        _check_site(j, self.size)
        _check_site(k, self.size)
        return self.eigenvectors[j - 1] * self.eigenvectors[k - 1]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


@dataclass(frozen=True, eq=False)
class AmplitudeSeries:
    source: int
    target: int
    truncation: int
    grid: TauGrid
    values: np.ndarray

    @property
    def tau_grid(self) -> np.ndarray:
        return self.grid.taus

    @property
    def probability(self) -> np.ndarray:
        return np.abs(self.values) ** 2


@dataclass(frozen=True, eq=False)
class InitialState:
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim != 1 or a.size < 2:
            raise ValidationError("state must be a vector with at least two amplitudes")
        norm = float(np.sum(np.abs(a) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise ValidationError(f"state is not normalised: sum |a_j|^2 = {norm!r}")
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def basis(cls, n: int, j: int) -> "InitialState":
        _check_site(j, n)
        a = np.zeros(n, dtype=complex)
        a[j - 1] = 1.0
        return cls(a)

    @classmethod
    def normalized(cls, amplitudes) -> "InitialState":
        a = np.asarray(amplitudes, dtype=complex)
        norm = np.sqrt(np.sum(np.abs(a) ** 2))
        if norm == 0:
            raise ValidationError("cannot normalise the zero vector")
        return cls(a / norm)

    @property
    def size(self) -> int:
        return self.amplitudes.shape[0]


def _check_site(site: int, n: int) -> None:
    if int(site) != site or not 1 <= site <= n:
        raise ValidationError(f"site {site!r} outside 1..{n}")


def decompose(matrix: CouplingMatrix) -> SpectralDecomposition:
    try:
        lam, vec = np.linalg.eigh(matrix.entries)
    except np.linalg.LinAlgError as exc:
        s = matrix.spec
        raise EigensolverError(
            f"eigensolver did not converge for N={s.n_spins}, M={s.neighbor_range}, "
            f"alpha={s.alpha}: {exc}"
        ) from exc
    lam.setflags(write=False)
    vec.setflags(write=False)
    return SpectralDecomposition(matrix.spec, lam, vec)


@lru_cache(maxsize=1024)
def spectral_decomposition(spec: ChainSpec) -> SpectralDecomposition:
    """Cached ``decompose(build_coupling_matrix(spec))``; keyed by (N, M, alpha)."""
    return decompose(build_coupling_matrix(spec))


def amplitude_matrix(decomp: SpectralDecomposition, tau: float) -> np.ndarray:
    """Full propagator P(tau) with P[k-1, j-1] = p_jk(tau).

    The result is symmetrised explicitly, so P == P.T holds bit for bit.
    """
    if not np.isfinite(tau):
        raise ValidationError(f"tau must be finite, got {tau!r}")
    v = decomp.eigenvectors
    phase = np.exp(-1j * decomp.eigenvalues * tau)
    p = (v * phase) @ v.T
    return 0.5 * (p + p.T)


def amplitude_tensor(decomp: SpectralDecomposition, taus: np.ndarray) -> np.ndarray:
    """P(tau_s) stacked along axis 0, shape (len(taus), N, N)."""
    v = decomp.eigenvectors
    phases = np.exp(-1j * np.outer(np.asarray(taus, dtype=float), decomp.eigenvalues))
    p = np.einsum("jq,sq,kq->sjk", v, phases, v, optimize=True)
    return 0.5 * (p + np.swapaxes(p, 1, 2))


def amplitude_values(decomp: SpectralDecomposition, j: int, k: int, taus: np.ndarray) -> np.ndarray:
    c = decomp.overlap_weights(j, k)
    phases = np.exp(-1j * np.outer(np.asarray(taus, dtype=float), decomp.eigenvalues))
    return phases @ c


def amplitude_series(spec: ChainSpec, j: int, k: int, grid: TauGrid) -> AmplitudeSeries:
    _check_site(j, spec.n_spins)
    _check_site(k, spec.n_spins)
    decomp = spectral_decomposition(spec)
    values = amplitude_values(decomp, j, k, grid.taus)
    return AmplitudeSeries(j, k, spec.neighbor_range, grid, values)


def nni_analytic_amplitude(n: int, j: int, k: int, tau):
    """Nearest-neighbour amplitude from the closed-form sine eigenbasis.

    The uniform tridiagonal matrix with off-diagonal 1/2 has eigenvalues
    cos(q pi/(N+1)) and eigenvectors sqrt(2/(N+1)) sin(q j pi/(N+1)). Accepts a
    scalar or array ``tau``; no numerical diagonalisation is involved.
    """
    if n < 2:
        raise ValidationError("n must be >= 2")
    _check_site(j, n)
    _check_site(k, n)
    q = np.arange(1, n + 1)
    theta = q * np.pi / (n + 1)
    lam = np.cos(theta)
    weights = (2.0 / (n + 1)) * np.sin(j * theta) * np.sin(k * theta)
    t = np.asarray(tau, dtype=float)
    out = np.exp(-1j * np.multiply.outer(t, lam)) @ weights
    return complex(out) if out.ndim == 0 else out


def evolve_state(state: InitialState, spec: ChainSpec, tau: float) -> InitialState:
    """b_k = sum_j a_j p_jk(tau)."""
    if state.size != spec.n_spins:
        raise ValidationError(
            f"state has {state.size} amplitudes but the chain has {spec.n_spins} sites"
        )
    p = amplitude_matrix(spectral_decomposition(spec), tau)
    return InitialState(p @ state.amplitudes)
