"""How the alpha scan step moves the fitted (a, b, c).

    python scripts/resolution_study.py --dalpha 0.01 0.001 --cache-dir .cache
"""

import argparse

from nni_validity.cache import ResultCache
from nni_validity.criticality import CriterionTarget, alpha_c_vs_n
from nni_validity.fitting import fit_log


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dalpha", type=float, nargs="+", default=[0.01, 0.001])
    parser.add_argument("--cache-dir", default=None)
    args = parser.parse_args()
    cache = ResultCache.from_env(args.cache_dir)
    n_grid = range(10, 101, 10)
    print("target,dalpha,a,b,c,sse")
    for target in (CriterionTarget.end_to_end(), CriterionTarget.full_matrix()):
        for d in args.dalpha:
            entries = alpha_c_vs_n(n_grid, target, resolution=d, cache=cache)
            fit = fit_log([(e.n, e.result.alpha_c) for e in entries])
            print(f"{target.kind.value},{d:g},{fit.a:.4f},{fit.b:.4f},{fit.c:.4f},{fit.sse:.3e}")


if __name__ == "__main__":
    main()
