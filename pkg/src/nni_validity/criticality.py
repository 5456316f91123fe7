"""Critical coupling exponent alpha_c above which the nearest-neighbour model is adequate.

alpha_c is the grid point just above the largest exponent on 3, 3 + d, 3 + 2d, ...
at which the criterion fails. Every grid point above it is evaluated rather
than bisected for: the criterion is not known to be monotone in alpha, and the
threshold must hold for every larger exponent.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .discrepancy import (
    DEFAULT_EPSILON,
    DEFAULT_GRID_STEP,
    DEGENERATE_FLOOR,
    PairIntegrals,
    Tolerance,
    mirror_pair,
    select_max,
    tie_slack,
    upper_pairs,
)
from .errors import CeilingExceededError, DegenerateSignalError, NumericalError, ValidationError
from .quadrature import TauGrid

ALPHA_FLOOR = 3.0
DEFAULT_RESOLUTION = 0.01
THREADS_ENV = "NNI_VALIDITY_THREADS"


class TargetKind(str, enum.Enum):
    END_TO_END = "p1n"
    FULL_MATRIX = "full"


_DEFAULT_FACTOR = {TargetKind.END_TO_END: 2.0, TargetKind.FULL_MATRIX: 4.0}


@dataclass(frozen=True)
class CriterionTarget:
    """Which amplitudes enter the criterion and over what horizon.

    The horizon is ``horizon_factor * N`` unless ``horizon`` fixes it outright.
    """

    kind: TargetKind
    horizon_factor: float | None = None
    horizon: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", TargetKind(self.kind))
        if self.horizon_factor is None:
            object.__setattr__(self, "horizon_factor", _DEFAULT_FACTOR[self.kind])
        if not self.horizon_factor > 0:
            raise ValidationError(f"horizon_factor must be positive, got {self.horizon_factor!r}")
        if self.horizon is not None and not self.horizon > 0:
            raise ValidationError(f"horizon must be positive, got {self.horizon!r}")

    @classmethod
    def end_to_end(cls, **kw) -> "CriterionTarget":
        return cls(TargetKind.END_TO_END, **kw)

    @classmethod
    def full_matrix(cls, **kw) -> "CriterionTarget":
        return cls(TargetKind.FULL_MATRIX, **kw)

    def horizon_for(self, n: int) -> float:
        return float(self.horizon) if self.horizon is not None else self.horizon_factor * n

    def with_horizon(self, horizon: float) -> "CriterionTarget":
        return CriterionTarget(self.kind, self.horizon_factor, horizon)

    def pairs(self, n: int) -> np.ndarray:
        if self.kind is TargetKind.END_TO_END:
            return np.array([[1, n]])
        return upper_pairs(n)

    def as_key(self) -> dict:
        return {"kind": self.kind.value, "horizon_factor": self.horizon_factor, "horizon": self.horizon}


class CriterionEvaluator:
    """criterion(alpha) for a fixed chain length, target and quadrature grid."""

    def __init__(self, n: int, target: CriterionTarget, grid_step: float = DEFAULT_GRID_STEP):
        if int(n) != n or n < 2:
            raise ValidationError(f"n must be an integer >= 2, got {n!r}")
        self.n = int(n)
        self.target = target
        self.nominal_horizon = target.horizon_for(self.n)
        self.grid = TauGrid.covering(self.nominal_horizon, grid_step)
        self._integrals = PairIntegrals(self.n, self.grid, target.pairs(self.n))

    @property
    def horizon(self) -> float:
        return self.grid.horizon

    def __call__(self, alpha: float) -> tuple[float, tuple[int, int]]:
        if not alpha > 0:
            raise ValidationError(f"alpha must be positive, got {alpha!r}")
        num, den = self._integrals.evaluate(alpha)
        if np.any(den < DEGENERATE_FLOOR):
            raise DegenerateSignalError(
                f"an all-neighbour amplitude has vanishing norm for N={self.n}, alpha={alpha}"
            )
        values = np.sqrt(num / den)
        pairs = self._integrals.pairs
        i = select_max(values, pairs, tie_slack(values, den, self._integrals.nni_sq))
        return float(values[i]), (int(pairs[i, 0]), int(pairs[i, 1]))


def criterion_value(
    n: int, alpha: float, target: CriterionTarget, grid_step: float = DEFAULT_GRID_STEP
) -> float:
    return CriterionEvaluator(n, target, grid_step)(alpha)[0]


@dataclass(frozen=True)
class CeilingPolicy:
    """Upper end of the alpha scan.

    The scan first covers [floor, floor + initial_span]; while the criterion
    still fails somewhere in the top quarter of the covered range the span
    doubles, up to ``hard_cap``.
    """

    initial_span: float = 8.0
    tail_fraction: float = 0.25
    hard_cap: float = 64.0


@dataclass(frozen=True)
class AlphaCResult:
    n_spins: int
    target: CriterionTarget
    horizon: float
    epsilon: float
    alpha_c: float
    alpha_resolution: float
    alpha_ceiling: float
    grid_step: float
    binding_pair: tuple[int, int] | None = None
    binding_value: float | None = None
    nominal_horizon: float | None = None
    n_evaluations: int = 0

    @property
    def at_floor(self) -> bool:
        return self.binding_pair is None

    @property
    def binding_alpha(self) -> float | None:
        if self.binding_pair is None:
            return None
        return round(self.alpha_c - self.alpha_resolution, 12)

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["target"] = self.target.as_key()
        rec["binding_pair"] = list(self.binding_pair) if self.binding_pair else None
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "AlphaCResult":
        rec = dict(rec)
        t = rec.pop("target")
        rec["target"] = CriterionTarget(TargetKind(t["kind"]), t["horizon_factor"], t["horizon"])
        if rec.get("binding_pair") is not None:
            rec["binding_pair"] = tuple(rec["binding_pair"])
        return cls(**rec)


def _alpha_at(i: int, floor: float, resolution: float) -> float:
    return round(floor + i * resolution, 12)


def find_alpha_c(
    n: int,
    target: CriterionTarget,
    epsilon: float = DEFAULT_EPSILON,
    resolution: float = DEFAULT_RESOLUTION,
    grid_step: float = DEFAULT_GRID_STEP,
    ceiling_policy: CeilingPolicy = CeilingPolicy(),
    floor: float = ALPHA_FLOOR,
) -> AlphaCResult:
    tol = Tolerance(epsilon)
    if not resolution > 0:
        raise ValidationError(f"alpha resolution must be positive, got {resolution!r}")
    evaluator = CriterionEvaluator(n, target, grid_step)

    evaluated: dict[int, tuple[float, tuple[int, int]]] = {}

    def fails(i: int) -> bool:
        if i not in evaluated:
            evaluated[i] = evaluator(_alpha_at(i, floor, resolution))
        return not tol.accepts(evaluated[i][0])

    # alpha_c only depends on the largest failing grid point, so scanning down
    # from the ceiling and stopping at the first failure gives the same answer
    # as scanning the whole grid, and still examines every alpha above alpha_c
    span = ceiling_policy.initial_span
    while True:
        ceiling = min(floor + span, ceiling_policy.hard_cap)
        top = int(math.floor((ceiling - floor) / resolution + 1e-9))
        tail_start = math.ceil((1.0 - ceiling_policy.tail_fraction) * top)
        tail_fail = next((i for i in range(top, tail_start - 1, -1) if fails(i)), None)
        if tail_fail is None:
            break
        if ceiling >= ceiling_policy.hard_cap:
            trailing = [
                (_alpha_at(i, floor, resolution), evaluated[i][0])
                for i in range(top, max(tail_fail, top - 5) - 1, -1)
                if i in evaluated
            ]
            raise CeilingExceededError(
                f"criterion never satisfied for N={n}, target={target.kind.value} up to "
                f"alpha={ceiling}; trailing values: "
                + ", ".join(f"{a:g}:{v:.4g}" for a, v in trailing),
                trailing,
            )
        span *= 2

    last_fail = next((i for i in range(tail_start - 1, -1, -1) if fails(i)), None)
    if last_fail is None:
        alpha_c, pair, bind_value = floor, None, None
    else:
        bind_value, pair = evaluated[last_fail]
        alpha_c = _alpha_at(last_fail + 1, floor, resolution)
    return AlphaCResult(
        n_spins=evaluator.n,
        target=target,
        horizon=evaluator.horizon,
        epsilon=epsilon,
        alpha_c=alpha_c,
        alpha_resolution=resolution,
        alpha_ceiling=_alpha_at(top, floor, resolution),
        grid_step=grid_step,
        binding_pair=pair,
        binding_value=bind_value,
        nominal_horizon=evaluator.nominal_horizon,
        n_evaluations=len(evaluated),
    )


@dataclass(frozen=True)
class SweepEntry:
    n: int
    result: AlphaCResult | None
    status: str = "ok"
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.result is not None


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "1") or 1)
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


def _cache_key(n: int, target: CriterionTarget, epsilon, resolution, grid_step) -> dict:
    return {
        "command": "alpha_c",
        "n": int(n),
        "target": target.as_key(),
        "epsilon": epsilon,
        "alpha_resolution": resolution,
        "grid_step": grid_step,
    }


def _sweep_cell(args) -> SweepEntry:
    n, target, epsilon, resolution, grid_step = args
    try:
        return SweepEntry(n, find_alpha_c(n, target, epsilon, resolution, grid_step))
    except (ValidationError, NumericalError) as exc:
        return SweepEntry(n, None, type(exc).__name__, str(exc))


def _sweep(cells: list[tuple], cache=None, workers: int | None = None) -> list[SweepEntry]:
    out: dict[int, SweepEntry] = {}
    todo = []
    for idx, cell in enumerate(cells):
        n, target, epsilon, resolution, grid_step = cell
        if cache is not None:
            hit = cache.get(_cache_key(*cell))
            if hit is not None:
                out[idx] = SweepEntry(n, AlphaCResult.from_record(hit))
                continue
        todo.append((idx, cell))

    workers = resolve_workers(workers)
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(todo))) as pool:
            computed = list(pool.map(_sweep_cell, [c for _, c in todo]))
    else:
        computed = [_sweep_cell(c) for _, c in todo]

    for (idx, cell), entry in zip(todo, computed):
        out[idx] = entry
        if cache is not None and entry.ok:
            cache.put(_cache_key(*cell), entry.result.to_record())
    return [out[i] for i in range(len(cells))]


def alpha_c_vs_n(
    n_grid,
    target: CriterionTarget,
    epsilon: float = DEFAULT_EPSILON,
    resolution: float = DEFAULT_RESOLUTION,
    grid_step: float = DEFAULT_GRID_STEP,
    cache=None,
    workers: int | None = None,
) -> list[SweepEntry]:
    """alpha_c for each chain length; failures are reported per entry, not raised."""
    cells = [(int(n), target, epsilon, resolution, grid_step) for n in n_grid]
    return _sweep(cells, cache, workers)


def alpha_c_vs_t(
    n: int,
    t_grid,
    target: CriterionTarget,
    epsilon: float = DEFAULT_EPSILON,
    resolution: float = DEFAULT_RESOLUTION,
    grid_step: float = DEFAULT_GRID_STEP,
    cache=None,
    workers: int | None = None,
) -> list[SweepEntry]:
    """alpha_c at fixed N with the horizon overridden by each T in ``t_grid``."""
    cells = [(int(n), target.with_horizon(float(t)), epsilon, resolution, grid_step) for t in t_grid]
    return _sweep(cells, cache, workers)


@dataclass(frozen=True)
class TransitionRecord:
    n: int
    pair: tuple[int, int] | None
    mirror: tuple[int, int] | None
    delta_j: float | None
    alpha: float | None
    alpha_c: float = field(default=float("nan"))


def transition_from_result(result: AlphaCResult) -> TransitionRecord:
    pair = result.binding_pair
    return TransitionRecord(
        n=result.n_spins,
        pair=pair,
        mirror=mirror_pair(result.n_spins, pair) if pair else None,
        delta_j=result.binding_value,
        alpha=result.binding_alpha,
        alpha_c=result.alpha_c,
    )


def argmax_transition_map(
    n_grid,
    epsilon: float = DEFAULT_EPSILON,
    resolution: float = DEFAULT_RESOLUTION,
    grid_step: float = DEFAULT_GRID_STEP,
    cache=None,
    workers: int | None = None,
    horizon_factor: float | None = None,
) -> list[TransitionRecord]:
    """Pair attaining the full-matrix maximum at the last failing exponent, per N.

    Chains whose alpha_c sits at the floor have no failing exponent and are
    reported with ``pair=None``.
    """
    target = CriterionTarget.full_matrix(horizon_factor=horizon_factor)
    entries = alpha_c_vs_n(n_grid, target, epsilon, resolution, grid_step, cache, workers)
    out = []
    for e in entries:
        if not e.ok:
            raise NumericalError(f"alpha_c search failed for N={e.n}: {e.message}")
        out.append(transition_from_result(e.result))
    return out
