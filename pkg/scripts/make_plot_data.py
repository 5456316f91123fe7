"""Write every plot-ready table the CLI can produce into one directory.

    python scripts/make_plot_data.py out/ [--dalpha 0.001] [--cache-dir .cache]

Each table is produced by the same CLI entry point users call, so the files
carry the usual metadata lines.
"""

import argparse
import sys
from pathlib import Path

from nni_validity.cli import main as cli


def run(argv):
    code = cli([str(a) for a in argv])
    if code not in (0, 4):
        sys.exit(code)
    return code


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("outdir", type=Path)
    parser.add_argument("--dalpha", type=float, default=0.001)
    parser.add_argument("--cache-dir", default=None)
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args()
    out = args.outdir
    out.mkdir(parents=True, exist_ok=True)
    sweep = ["--dalpha", args.dalpha]
    if args.cache_dir:
        sweep += ["--cache-dir", args.cache_dir]
    if args.threads is not None:
        sweep += ["--threads", args.threads]

    for n in (5, 20):
        run(["evolve", "--n", n, "--alpha", 3, "--pair", f"1,{n}", "--t-max", 2 * n,
             "--both-models", "-o", out / f"amplitude_n{n}.csv"])
    run(["deltaj", "--n-range", "5:50:5", "--alpha", 3, "-o", out / "deltaj_vs_n.jsonl"])
    run(["alphac", "--n-range", "10:100:10", "--target", "both", "--fit", *sweep,
         "-o", out / "alphac_vs_n.csv"])
    run(["alphac-vs-t", "--n", 20, "--t-range", "10:120:5", *sweep, "-o", out / "alphac_vs_t.csv"])
    run(["a-vs-nmax", "--input", out / "alphac_vs_n.csv", "--nmax-range", "50:100:10",
         "-o", out / "a_vs_nmax.csv"])
    run(["argmax-map", "--n-range", "4:40", *sweep, "-o", out / "binding_pairs.csv"])
    print(f"wrote tables to {out}")


if __name__ == "__main__":
    main()
