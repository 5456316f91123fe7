"""Command-line entry point: ``nni-validity <command> [options]``.

Every command writes plot-ready text: CSV (with ``#`` metadata lines and a
header row) for series and sweeps, JSON lines for discrepancy records.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 partial sweep failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cache import ResultCache
from .chain_model import ChainSpec
from .criticality import (
    DEFAULT_RESOLUTION,
    CriterionTarget,
    TargetKind,
    alpha_c_vs_n,
    alpha_c_vs_t,
    transition_from_result,
)
from .discrepancy import DEFAULT_EPSILON, DEFAULT_GRID_STEP, delta_j_max, delta_j_pair
from .errors import NumericalError, ValidationError
from .fitting import a_vs_nmax, fit_log
from .propagator import InitialState, amplitude_values, spectral_decomposition
from .quadrature import TauGrid

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_PARTIAL = 0, 2, 3, 4

RANGE_HELP = "range start:stop[:step], stop included when aligned with step (default step 1)"


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def parse_range(text: str, integer: bool = True) -> list:
    conv = int if integer else float
    parts = text.split(":")
    if not 1 <= len(parts) <= 3 or any(p.strip() == "" for p in parts):
        raise ValidationError(f"bad range {text!r}; expected start:stop[:step]")
    try:
        start = conv(parts[0])
        stop = conv(parts[1]) if len(parts) > 1 else start
        step = conv(parts[2]) if len(parts) > 2 else conv(1)
    except ValueError as exc:
        raise ValidationError(f"bad range {text!r}: {exc}") from None
    if step <= 0 or stop < start:
        raise ValidationError(f"bad range {text!r}; need step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    values = [start + i * step for i in range(count)]
    return values if integer else [round(v, 12) for v in values]


def parse_pair(text: str) -> tuple[int, int]:
    try:
        j, k = (int(x) for x in text.split(","))
    except ValueError:
        raise ValidationError(f"bad pair {text!r}; expected j,k") from None
    return j, k


def parse_model(text: str, n: int) -> int:
    text = text.strip().lower()
    if text == "nni":
        return 1
    if text == "ani":
        return n - 1
    if text.startswith("m="):
        try:
            return int(text[2:])
        except ValueError:
            pass
    raise ValidationError(f"bad model {text!r}; expected nni, ani or m=K")


def read_state(path: str, n: int, normalize: bool) -> InitialState:
    """Amplitudes one per line as ``re`` or ``re im``; ``#`` starts a comment."""
    amps = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].replace(",", " ").split()
            if not line:
                continue
            try:
                nums = [float(x) for x in line]
            except ValueError:
                raise ValidationError(f"{path}: cannot parse amplitude line {line!r}") from None
            if len(nums) not in (1, 2):
                raise ValidationError(f"{path}: expected 're' or 're im', got {line!r}")
            amps.append(complex(nums[0], nums[1] if len(nums) == 2 else 0.0))
    if len(amps) != n:
        raise ValidationError(f"{path}: {len(amps)} amplitudes for a chain of {n} sites")
    return InitialState.normalized(amps) if normalize else InitialState(np.array(amps))


@dataclass
class RunConfig:
    command: str
    epsilon: float = DEFAULT_EPSILON
    grid_step: float = DEFAULT_GRID_STEP
    alpha_resolution: float = DEFAULT_RESOLUTION
    horizon: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 1:
            raise ValidationError(f"--epsilon must lie in (0, 1), got {self.epsilon}")
        if not self.grid_step > 0:
            raise ValidationError(f"--dt must be positive, got {self.grid_step}")
        if not self.alpha_resolution > 0:
            raise ValidationError(f"--dalpha must be positive, got {self.alpha_resolution}")

    def metadata(self) -> str:
        items = {
            "command": self.command,
            "epsilon": fmt(self.epsilon),
            "grid_step": fmt(self.grid_step),
            "alpha_resolution": fmt(self.alpha_resolution),
            "horizon": self.horizon,
            **{k: v for k, v in self.extra.items()},
            "tool_version": __version__,
        }
        return "# " + " ".join(f"{k}={v}" for k, v in items.items())


@contextmanager
def open_output(path: str | None):
    if path in (None, "-"):
        buf = io.StringIO()
        yield buf
        sys.stdout.write(buf.getvalue())
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def write_csv(out, config: RunConfig, header: list[str], rows, trailer: list[str] = ()) -> None:
    out.write(config.metadata() + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    for line in trailer:
        out.write(f"# {line}\n")


def _targets(name: str) -> list[CriterionTarget]:
    if name == "both":
        return [CriterionTarget.end_to_end(), CriterionTarget.full_matrix()]
    return [CriterionTarget(TargetKind(name))]


def _cache(args) -> ResultCache | None:
    return ResultCache.from_env(getattr(args, "cache_dir", None))


# -- commands ---------------------------------------------------------------


def cmd_evolve(args) -> int:
    n = args.n
    grid = TauGrid.covering(args.t_max, args.dt, even=False)
    config = RunConfig(
        "evolve", grid_step=args.dt, horizon=fmt(grid.horizon),
        extra={"n": n, "alpha": fmt(args.alpha)},
    )
    models = [1, n - 1] if args.both_models else [parse_model(args.model, n)]
    specs = [ChainSpec(n, m, args.alpha) for m in models]

    if args.state:
        state = read_state(args.state, n, args.normalize)
        site = args.site if args.site is not None else n
        if not 1 <= site <= n:
            raise ValidationError(f"--site {site} outside 1..{n}")
        series = []
        for spec in specs:
            d = spectral_decomposition(spec)
            weights = d.eigenvectors[site - 1] * (d.eigenvectors.T @ state.amplitudes)
            series.append(np.exp(-1j * np.outer(grid.taus, d.eigenvalues)) @ weights)
        config.extra["site"] = site
    else:
        if args.pair is None:
            raise ValidationError("evolve needs --pair j,k or --state FILE")
        j, k = parse_pair(args.pair)
        series = [amplitude_values(spectral_decomposition(s), j, k, grid.taus) for s in specs]
        config.extra["pair"] = f"{j},{k}"

    if args.both_models:
        header = ["tau", "re_p_nni", "im_p_nni", "prob_nni", "re_p_ani", "im_p_ani", "prob_ani"]
    else:
        header = ["tau", "re_p", "im_p", "prob"]
        config.extra["m"] = models[0]

    def rows():
        for s, tau in enumerate(grid.taus):
            row = [tau]
            for values in series:
                p = values[s]
                row += [p.real, p.imag, abs(p) ** 2]
            yield row

    with open_output(args.output) as out:
        write_csv(out, config, header, rows())
    return EXIT_OK


def cmd_deltaj(args) -> int:
    records = []
    for n in parse_range(args.n_range):
        target = CriterionTarget(TargetKind(args.target), args.t_factor, args.horizon)
        horizon = target.horizon_for(n)
        if target.kind is TargetKind.END_TO_END:
            res = delta_j_pair(n, args.alpha, 1, n, horizon, args.dt)
        else:
            res, _ = delta_j_max(n, args.alpha, horizon, args.dt)
        records.append(
            {
                "n": n,
                "alpha": args.alpha,
                "target": target.kind.value,
                "horizon": res.horizon,
                "grid_step": args.dt,
                "delta_j": res.value,
                "pair": list(res.pair),
                "numerator_sq": res.numerator_sq,
                "denominator_sq": res.denominator_sq,
                "tool_version": __version__,
            }
        )
    with open_output(args.output) as out:
        for rec in records:
            out.write(json.dumps(rec, separators=(", ", ": ")) + "\n")
    return EXIT_OK


def _sweep_rows(entries, target_name):
    for e in entries:
        r = e.result
        if r is None:
            yield [e.n, target_name, "", "", "", "", "", "", f"{e.status}: {e.message}"]
            continue
        j, k = r.binding_pair if r.binding_pair else (None, None)
        yield [e.n, target_name, r.horizon, r.alpha_c, j, k, r.binding_value, r.alpha_ceiling, "ok"]


SWEEP_HEADER = [
    "n", "target", "horizon", "alpha_c", "binding_j", "binding_k",
    "binding_delta_j", "alpha_ceiling", "status",
]


def cmd_alphac(args) -> int:
    targets = _targets(args.target)
    n_grid = parse_range(args.n_range)
    config = RunConfig(
        "alphac", args.epsilon, args.dt, args.dalpha,
        horizon="+".join(f"{fmt(t.horizon_factor)}N" for t in targets),
    )
    cache = _cache(args)
    rows, trailer, failed = [], [], False
    by_target = {}
    for target in targets:
        entries = alpha_c_vs_n(
            n_grid, target, args.epsilon, args.dalpha, args.dt, cache, args.threads
        )
        by_target[target.kind] = entries
        rows.extend(_sweep_rows(entries, target.kind.value))
        failed |= any(not e.ok for e in entries)
        if args.fit:
            pts = [(e.n, e.result.alpha_c) for e in entries if e.ok]
            try:
                fit = fit_log(pts)
                trailer.append(f"logfit target={target.kind.value} " + json.dumps(fit.to_record()))
            except ValidationError as exc:
                trailer.append(f"logfit target={target.kind.value} error={exc}")
    if len(by_target) == 2:
        ok = all(
            f.result.alpha_c >= e.result.alpha_c
            for e, f in zip(by_target[TargetKind.END_TO_END], by_target[TargetKind.FULL_MATRIX])
            if e.ok and f.ok
        )
        trailer.append(f"dominance_ok={fmt(ok)}")
    rows.sort(key=lambda r: (r[0], r[1]))
    with open_output(args.output) as out:
        write_csv(out, config, SWEEP_HEADER, rows, trailer)
    if failed:
        print("some sweep cells failed; see the status column", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_alphac_vs_t(args) -> int:
    targets = _targets(args.target)
    t_grid = parse_range(args.t_range, integer=False)
    config = RunConfig(
        "alphac-vs-t", args.epsilon, args.dt, args.dalpha, horizon="swept", extra={"n": args.n}
    )
    cache = _cache(args)
    rows, failed = [], False
    for target in targets:
        entries = alpha_c_vs_t(
            args.n, t_grid, target, args.epsilon, args.dalpha, args.dt, cache, args.threads
        )
        for t, e in zip(t_grid, entries):
            r = e.result
            if r is None:
                failed = True
                rows.append([t, target.kind.value, "", "", f"{e.status}: {e.message}"])
            else:
                rows.append([t, target.kind.value, r.horizon, r.alpha_c, "ok"])
    rows.sort(key=lambda r: (r[1] != "p1n", r[0]))
    with open_output(args.output) as out:
        write_csv(out, config, ["t", "target", "horizon", "alpha_c", "status"], rows)
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_argmax_map(args) -> int:
    n_grid = parse_range(args.n_range)
    target = CriterionTarget.full_matrix()
    config = RunConfig("argmax-map", args.epsilon, args.dt, args.dalpha, horizon="4N")
    entries = alpha_c_vs_n(n_grid, target, args.epsilon, args.dalpha, args.dt, _cache(args), args.threads)
    rows, failed = [], False
    for e in entries:
        if not e.ok:
            failed = True
            rows.append([e.n, "", "", "", "", "", "", "", f"{e.status}: {e.message}"])
            continue
        t = transition_from_result(e.result)
        j, k = t.pair or (None, None)
        jm, km = t.mirror or (None, None)
        rows.append([t.n, j, k, jm, km, t.delta_j, t.alpha, t.alpha_c, "ok"])
    header = ["n", "j", "k", "j_mirror", "k_mirror", "delta_j", "alpha", "alpha_c", "status"]
    with open_output(args.output) as out:
        write_csv(out, config, header, rows)
    return EXIT_PARTIAL if failed else EXIT_OK


def read_metadata(lines: list[str]) -> dict[str, str]:
    """key=value items of the first ``# command=`` line."""
    for ln in lines:
        if ln.startswith("# command="):
            return dict(item.split("=", 1) for item in ln[2:].split() if "=" in item)
    return {}


def read_sweep_csv(path: str, meta: dict | None = None) -> dict[str, list[tuple[int, float]]]:
    """(n, alpha_c) points per target from an ``alphac`` output file.

    The file's metadata items are copied into ``meta`` when given.
    """
    points: dict[str, list[tuple[int, float]]] = {}
    with open(path, encoding="utf-8") as fh:
        raw = fh.readlines()
    if meta is not None:
        meta.update(read_metadata(raw))
    lines = [ln for ln in raw if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    missing = {"n", "target", "alpha_c", "status"} - set(reader.fieldnames or [])
    if missing:
        raise ValidationError(f"{path}: not an alphac sweep file (missing {sorted(missing)})")
    for row in reader:
        if row["status"] != "ok":
            continue
        points.setdefault(row["target"], []).append((int(row["n"]), float(row["alpha_c"])))
    return points


def cmd_a_vs_nmax(args) -> int:
    config = RunConfig("a-vs-nmax", args.epsilon, args.dt, args.dalpha, horizon="from-sweep")
    if args.input:
        points: dict[str, list] = {}
        metas = []
        for path in args.input:
            meta: dict = {}
            for tgt, pts in read_sweep_csv(path, meta).items():
                points.setdefault(tgt, []).extend(pts)
            metas.append(meta)
        # report the settings the sweep was run with, not this command's defaults
        for key in ("epsilon", "grid_step", "alpha_resolution"):
            values = {m[key] for m in metas if key in m}
            if len(values) > 1:
                raise ValidationError(f"input files disagree on {key}: {sorted(values)}")
            if values:
                setattr(config, key, float(values.pop()))
        config.extra["input"] = ",".join(args.input)
    elif args.n_range:
        points = {}
        for target in _targets(args.target):
            entries = alpha_c_vs_n(
                parse_range(args.n_range), target, args.epsilon, args.dalpha, args.dt,
                _cache(args), args.threads,
            )
            if any(not e.ok for e in entries):
                raise NumericalError("alpha_c sweep failed for some N; run alphac for details")
            points[target.kind.value] = [(e.n, e.result.alpha_c) for e in entries]
    else:
        raise ValidationError("a-vs-nmax needs --input FILE or --n-range")

    rows = []
    for tgt in sorted(points, key=lambda t: t != "p1n"):
        pts = sorted(set(points[tgt]))
        ns = [n for n, _ in pts]
        nmax_grid = parse_range(args.nmax_range) if args.nmax_range else ns[3:]
        for n_max, a in a_vs_nmax(pts, nmax_grid):
            rows.append([n_max, tgt, a])
    with open_output(args.output) as out:
        write_csv(out, config, ["n_max", "target", "a"], rows)
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _add_common(p, sweep: bool = True) -> None:
    p.add_argument("--dt", type=float, default=DEFAULT_GRID_STEP, help="tau grid step (default 0.05)")
    p.add_argument("-o", "--output", default=None, help="output file (default stdout)")
    if sweep:
        p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="tolerance (default 0.01)")
        p.add_argument("--dalpha", type=float, default=DEFAULT_RESOLUTION, help="alpha scan step (default 0.01)")
        p.add_argument("--cache-dir", default=None, help="result cache directory (or $NNI_VALIDITY_CACHE)")
        p.add_argument("--threads", type=int, default=None,
                       help="worker processes for sweeps, 0 = all cores (or $NNI_VALIDITY_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nni-validity",
        description="Nearest- vs all-neighbour one-excitation dynamics of XX spin chains.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="amplitude time series p_jk(tau) or an evolved state's site amplitude")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=3.0)
    p.add_argument("--model", default="ani", help="nni, ani or m=K (default ani)")
    p.add_argument("--both-models", action="store_true", help="emit NNI and ANI columns side by side")
    p.add_argument("--pair", help="source,target sites j,k (1-based)")
    p.add_argument("--state", help="initial-state file, one amplitude 're [im]' per line")
    p.add_argument("--normalize", action="store_true", help="rescale the state file to unit norm")
    p.add_argument("--site", type=int, help="site to report for --state (default N)")
    p.add_argument("--t-max", type=float, required=True)
    _add_common(p, sweep=False)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("deltaj", help="discrepancy delta_J over a range of chain lengths (JSON lines)")
    p.add_argument("--n-range", required=True, help=RANGE_HELP)
    p.add_argument("--alpha", type=float, default=3.0)
    p.add_argument("--target", choices=["p1n", "full"], default="p1n")
    p.add_argument("--t-factor", type=float, default=None, help="horizon T = factor * N (default 2 or 4)")
    p.add_argument("--horizon", type=float, default=None, help="fixed horizon T overriding --t-factor")
    _add_common(p, sweep=False)
    p.set_defaults(func=cmd_deltaj)

    p = sub.add_parser("alphac", help="critical exponent alpha_c over a range of N")
    p.add_argument("--n-range", required=True, help=RANGE_HELP)
    p.add_argument("--target", choices=["p1n", "full", "both"], default="p1n")
    p.add_argument("--fit", action="store_true", help="append the logarithmic fit as a # logfit line")
    _add_common(p)
    p.set_defaults(func=cmd_alphac)

    p = sub.add_parser("alphac-vs-t", help="alpha_c as a function of the horizon T at fixed N")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--t-range", default="10:120:5", help=RANGE_HELP)
    p.add_argument("--target", choices=["p1n", "full", "both"], default="both")
    _add_common(p)
    p.set_defaults(func=cmd_alphac_vs_t)

    p = sub.add_parser("argmax-map", help="pair (j,k) binding the full-matrix criterion, per N")
    p.add_argument("--n-range", required=True, help=RANGE_HELP)
    _add_common(p)
    p.set_defaults(func=cmd_argmax_map)

    p = sub.add_parser("a-vs-nmax", help="fitted coefficient a against the largest N in the fit")
    p.add_argument("--input", nargs="+", help="alphac CSV file(s)")
    p.add_argument("--n-range", help="run (or load from cache) a sweep instead of --input; " + RANGE_HELP)
    p.add_argument("--target", choices=["p1n", "full", "both"], default="both")
    p.add_argument("--nmax-range", help="N_max values (default: every N from the 4th point on)")
    _add_common(p)
    p.set_defaults(func=cmd_a_vs_nmax)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, OSError) as exc:
        print(f"nni-validity: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"nni-validity: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
