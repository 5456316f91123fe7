"""Applicability of the nearest-neighbour approximation to one-excitation XX-chain dynamics."""

__version__ = "0.1.0"

from .chain_model import ChainSpec, CouplingMatrix, build_coupling_matrix  # noqa: E402
from .criticality import (  # noqa: E402
    AlphaCResult,
    CriterionTarget,
    TargetKind,
    alpha_c_vs_n,
    alpha_c_vs_t,
    argmax_transition_map,
    criterion_value,
    find_alpha_c,
)
from .discrepancy import (  # noqa: E402
    DiscrepancyResult,
    Tolerance,
    delta_j,
    delta_j_max,
    delta_j_pair,
    pointwise_discrepancy,
)
from .fitting import LogFit, a_vs_nmax, fit_log  # noqa: E402
from .propagator import (  # noqa: E402
    AmplitudeSeries,
    InitialState,
    SpectralDecomposition,
    amplitude_matrix,
    amplitude_series,
    decompose,
    evolve_state,
    nni_analytic_amplitude,
)
