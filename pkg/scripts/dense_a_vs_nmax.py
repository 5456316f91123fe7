"""Fitted coefficient a against N_max on a dense grid of chain lengths.

On a grid spaced by 10 the full-matrix alpha_c(N) is rough, because the pair
binding the criterion changes between neighbouring points, and a(N_max) picks
that roughness up. A grid spaced by 1 smooths it out.

    python scripts/dense_a_vs_nmax.py --n-range 5:100 --cache-dir .cache
"""

import argparse

from nni_validity.cache import ResultCache
from nni_validity.cli import parse_range
from nni_validity.criticality import CriterionTarget, alpha_c_vs_n
from nni_validity.fitting import a_vs_nmax, fit_log


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-range", default="5:100")
    parser.add_argument("--nmax-range", default="50:100:10")
    parser.add_argument("--dalpha", type=float, default=0.001)
    parser.add_argument("--cache-dir", default=None)
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args()

    cache = ResultCache.from_env(args.cache_dir)
    n_grid = parse_range(args.n_range)
    nmax = parse_range(args.nmax_range)
    print("target,n_max,a")
    for target in (CriterionTarget.end_to_end(), CriterionTarget.full_matrix()):
        entries = alpha_c_vs_n(n_grid, target, resolution=args.dalpha, cache=cache, workers=args.threads)
        pts = [(e.n, e.result.alpha_c) for e in entries if e.ok]
        for n_max, a in a_vs_nmax(pts, nmax):
            print(f"{target.kind.value},{n_max},{a:.6f}")
        fit = fit_log(pts)
        print(f"# {target.kind.value} all points: a={fit.a:.4f} b={fit.b:.4f} c={fit.c:.4f}")


if __name__ == "__main__":
    main()
